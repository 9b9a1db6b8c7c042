#pragma once

#include <utility>
#include <vector>
#include <Eigen/Core>

namespace sola {

struct Sample {
  Eigen::VectorXd features;
  Eigen::VectorXd target;  // 1-dim regression target, or a single class id for classification
};

using Batch = std::vector<Sample>;

// Append-only sample store. Rows are samples; storage over-allocates (doubling)
// so repeated appends stay linear overall.
class Dataset {
 public:
  Dataset() = default;

  int size() const { return m_; }
  bool empty() const { return m_ == 0; }
  int feature_dim() const { return static_cast<int>(x_.cols()); }
  int target_dim() const { return static_cast<int>(y_.cols()); }

  Eigen::Block<const Eigen::MatrixXd> features() const { return x_.topRows(m_); }
  Eigen::Block<const Eigen::MatrixXd> targets() const { return y_.topRows(m_); }

  void append(const Sample& s);
  void append(const Batch& b);
  void append_rows(const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb);

  Dataset rows(const std::vector<int>& idx) const;  // copy of selected samples

 private:
  void ensure_capacity(int extra, int p, int q);
  Eigen::MatrixXd x_;
  Eigen::MatrixXd y_;
  int m_ = 0;
};

// Dataset growth is strictly monotone: the grown set extends the old one,
// prior samples untouched.
void accumulate(Dataset& d, const Batch& batch);

struct Event {
  int k = 0;  // 1-based event index after the merge
  double t = 0.0;
  int agent = 0;
  Batch batch;
};

struct EventSchedule {
  std::vector<Event> events;
  std::vector<int> agent_ids;  // distinct ids present, ascending
  int size() const { return static_cast<int>(events.size()); }
};

using AgentStream = std::vector<std::pair<double, Batch>>;  // (wall time, batch), sorted by time

// Union of per-agent streams ordered by wall time; simultaneous arrivals are
// serialized by ascending agent id so each event index has exactly one acting agent.
EventSchedule merge_schedules(const std::vector<std::pair<int, AgentStream>>& per_agent);

}  // namespace sola
