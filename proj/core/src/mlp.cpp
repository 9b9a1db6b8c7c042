#include "sola/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sola {

namespace {

constexpr int kChunk = 1024;  // rows per forward pass, bounds intermediates

struct Views {
  Eigen::Map<const Eigen::MatrixXd> w1, w2;
  Eigen::Map<const Eigen::VectorXd> b1, b2;
};

Views map_params(const Parameter& x, int in, int hid, int out) {
  const double* p = x.data();
  return Views{
      {p, in, hid}, {p + in * hid + hid, hid, out}, {p + in * hid, hid},
      {p + in * hid + hid + hid * out, out}};
}

int label_of(const Eigen::MatrixXd& targets, int row, int classes) {
  double raw = targets(row, 0);
  int lbl = static_cast<int>(std::lround(raw));
  if (lbl < 0 || lbl >= classes) throw std::invalid_argument("label out of range");
  return lbl;
}

}  // namespace

MlpProblem::MlpProblem(int inputs, int hidden, int classes)
    : in_(inputs), hid_(hidden), out_(classes) {
  if (inputs < 1 || hidden < 1 || classes < 2)
    throw std::invalid_argument("bad network dimensions");
  n_ = in_ * hid_ + hid_ + hid_ * out_ + out_;
}

double MlpProblem::loss(const Parameter& x, const Dataset& data) const {
  if (x.size() != n_) throw std::invalid_argument("parameter size mismatch");
  if (data.empty()) throw std::invalid_argument("loss on empty dataset");
  auto X = data.features();
  auto Y = data.targets();
  if (X.cols() != in_) throw std::invalid_argument("feature width mismatch");
  Views v = map_params(x, in_, hid_, out_);

  int m = static_cast<int>(X.rows());
  double total = 0.0;
  for (int start = 0; start < m; start += kChunk) {
    int c = std::min(kChunk, m - start);
    Eigen::MatrixXd z1 = X.middleRows(start, c) * v.w1;
    z1.rowwise() += v.b1.transpose();
    Eigen::MatrixXd z2 = z1.cwiseMax(0.0) * v.w2;
    z2.rowwise() += v.b2.transpose();
    for (int i = 0; i < c; ++i) {
      double mx = z2.row(i).maxCoeff();
      double lse = mx + std::log((z2.row(i).array() - mx).exp().sum());
      total += lse - z2(i, label_of(Y, start + i, out_));
    }
  }
  return total / m;
}

Parameter MlpProblem::grad(const Parameter& x, const Dataset& data) const {
  if (x.size() != n_) throw std::invalid_argument("parameter size mismatch");
  if (data.empty()) throw std::invalid_argument("grad on empty dataset");
  auto X = data.features();
  auto Y = data.targets();
  if (X.cols() != in_) throw std::invalid_argument("feature width mismatch");
  Views v = map_params(x, in_, hid_, out_);

  Parameter g = Parameter::Zero(n_);
  double* gp = g.data();
  Eigen::Map<Eigen::MatrixXd> gw1(gp, in_, hid_);
  Eigen::Map<Eigen::VectorXd> gb1(gp + in_ * hid_, hid_);
  Eigen::Map<Eigen::MatrixXd> gw2(gp + in_ * hid_ + hid_, hid_, out_);
  Eigen::Map<Eigen::VectorXd> gb2(gp + in_ * hid_ + hid_ + hid_ * out_, out_);

  int m = static_cast<int>(X.rows());
  for (int start = 0; start < m; start += kChunk) {
    int c = std::min(kChunk, m - start);
    auto Xc = X.middleRows(start, c);
    Eigen::MatrixXd z1 = Xc * v.w1;
    z1.rowwise() += v.b1.transpose();
    Eigen::MatrixXd h = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = h * v.w2;
    z2.rowwise() += v.b2.transpose();

    // dz2 = softmax - onehot (sum form; mean applied at the end)
    Eigen::MatrixXd dz2(c, out_);
    for (int i = 0; i < c; ++i) {
      double mx = z2.row(i).maxCoeff();
      Eigen::ArrayXd e = (z2.row(i).array() - mx).exp();
      dz2.row(i) = (e / e.sum()).matrix().transpose();
      dz2(i, label_of(Y, start + i, out_)) -= 1.0;
    }

    gw2.noalias() += h.transpose() * dz2;
    gb2 += dz2.colwise().sum().transpose();
    Eigen::MatrixXd dz1 =
        (dz2 * v.w2.transpose()).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    gw1.noalias() += Xc.transpose() * dz1;
    gb1 += dz1.colwise().sum().transpose();
  }
  g /= static_cast<double>(m);
  return g;
}

double MlpProblem::accuracy(const Parameter& x, const Dataset& data) const {
  if (x.size() != n_) throw std::invalid_argument("parameter size mismatch");
  if (data.empty()) throw std::invalid_argument("accuracy on empty dataset");
  auto X = data.features();
  auto Y = data.targets();
  Views v = map_params(x, in_, hid_, out_);

  int m = static_cast<int>(X.rows());
  int hits = 0;
  for (int start = 0; start < m; start += kChunk) {
    int c = std::min(kChunk, m - start);
    Eigen::MatrixXd z1 = X.middleRows(start, c) * v.w1;
    z1.rowwise() += v.b1.transpose();
    Eigen::MatrixXd z2 = z1.cwiseMax(0.0) * v.w2;
    z2.rowwise() += v.b2.transpose();
    for (int i = 0; i < c; ++i) {
      Eigen::Index best;
      z2.row(i).maxCoeff(&best);  // first occurrence wins ties
      if (static_cast<int>(best) == label_of(Y, start + i, out_)) ++hits;
    }
  }
  return static_cast<double>(hits) / m;
}

Eigen::VectorXd MlpProblem::probabilities(const Parameter& x, const Eigen::VectorXd& input) const {
  if (x.size() != n_) throw std::invalid_argument("parameter size mismatch");
  if (input.size() != in_) throw std::invalid_argument("input size mismatch");
  Views v = map_params(x, in_, hid_, out_);
  Eigen::VectorXd z1 = v.w1.transpose() * input + v.b1;
  Eigen::VectorXd z2 = v.w2.transpose() * z1.cwiseMax(0.0) + v.b2;
  Eigen::ArrayXd e = (z2.array() - z2.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

Parameter MlpProblem::he_init(Rng& rng) const {
  Parameter x = Parameter::Zero(n_);
  double s1 = std::sqrt(2.0 / in_);
  double s2 = std::sqrt(2.0 / hid_);
  double* p = x.data();
  for (int i = 0; i < in_ * hid_; ++i) p[i] = s1 * rng.gaussian();
  // biases stay zero
  for (int i = 0; i < hid_ * out_; ++i) p[in_ * hid_ + hid_ + i] = s2 * rng.gaussian();
  return x;
}

}  // namespace sola
