#include "sola/data.hpp"

#include <algorithm>
#include <stdexcept>

namespace sola {

void Dataset::ensure_capacity(int extra, int p, int q) {
  if (m_ == 0 && x_.rows() == 0) {
    int cap = std::max(extra, 16);
    x_.resize(cap, p);
    y_.resize(cap, q);
    return;
  }
  if (p != x_.cols()) throw std::invalid_argument("dataset: feature dimension mismatch");
  if (q != y_.cols()) throw std::invalid_argument("dataset: target dimension mismatch");
  if (m_ + extra <= x_.rows()) return;
  int cap = static_cast<int>(x_.rows());
  while (cap < m_ + extra) cap *= 2;
  Eigen::MatrixXd nx(cap, p), ny(cap, q);
  nx.topRows(m_) = x_.topRows(m_);
  ny.topRows(m_) = y_.topRows(m_);
  x_ = std::move(nx);
  y_ = std::move(ny);
}

void Dataset::append(const Sample& s) {
  ensure_capacity(1, static_cast<int>(s.features.size()), static_cast<int>(s.target.size()));
  x_.row(m_) = s.features.transpose();
  y_.row(m_) = s.target.transpose();
  ++m_;
}

void Dataset::append(const Batch& b) {
  if (b.empty()) throw std::invalid_argument("dataset: empty batch");
  for (const auto& s : b) append(s);
}

void Dataset::append_rows(const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb) {
  if (xb.rows() == 0) throw std::invalid_argument("dataset: empty batch");
  if (xb.rows() != yb.rows()) throw std::invalid_argument("dataset: row count mismatch");
  ensure_capacity(static_cast<int>(xb.rows()), static_cast<int>(xb.cols()),
                  static_cast<int>(yb.cols()));
  x_.middleRows(m_, xb.rows()) = xb;
  y_.middleRows(m_, yb.rows()) = yb;
  m_ += static_cast<int>(xb.rows());
}

Dataset Dataset::rows(const std::vector<int>& idx) const {
  Dataset out;
  if (idx.empty()) return out;
  Eigen::MatrixXd xb(idx.size(), x_.cols()), yb(idx.size(), y_.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    xb.row(i) = x_.row(idx[i]);
    yb.row(i) = y_.row(idx[i]);
  }
  out.append_rows(xb, yb);
  return out;
}

void accumulate(Dataset& d, const Batch& batch) { d.append(batch); }

EventSchedule merge_schedules(const std::vector<std::pair<int, AgentStream>>& per_agent) {
  EventSchedule out;
  std::size_t total = 0;
  for (const auto& [id, stream] : per_agent) {
    for (std::size_t j = 1; j < stream.size(); ++j)
      if (stream[j].first < stream[j - 1].first)
        throw std::invalid_argument("unsorted schedule for agent " + std::to_string(id));
    total += stream.size();
  }
  if (total == 0) throw std::invalid_argument("no events");

  out.events.reserve(total);
  for (const auto& [id, stream] : per_agent) {
    for (const auto& [t, batch] : stream) {
      Event e;
      e.t = t;
      e.agent = id;
      e.batch = batch;
      out.events.push_back(std::move(e));
    }
    if (!stream.empty()) out.agent_ids.push_back(id);
  }
  std::stable_sort(out.events.begin(), out.events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.agent < b.agent;
  });
  for (std::size_t j = 0; j < out.events.size(); ++j) out.events[j].k = static_cast<int>(j) + 1;
  std::sort(out.agent_ids.begin(), out.agent_ids.end());
  out.agent_ids.erase(std::unique(out.agent_ids.begin(), out.agent_ids.end()),
                      out.agent_ids.end());
  return out;
}

}  // namespace sola
