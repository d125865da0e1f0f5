#include "lissnas/predictor.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lissnas/csv.hpp"
#include "lissnas/error.hpp"

namespace lissnas {

std::size_t embedding_length(const SpaceSpec& spec) {
  if (spec.is_block()) {
    std::size_t len = 0;
    for (int c : spec.block_dims().choices) len += static_cast<std::size_t>(c);
    return len;
  }
  const auto n = static_cast<std::size_t>(spec.cell_dims().max_nodes);
  return n * (n - 1) / 2 + (n - 2) * (spec.intermediate_ops().size() + 1);
}

std::vector<double> embed(const Architecture& arch, const SpaceSpec& spec) {
  std::vector<double> e(embedding_length(spec), 0.0);
  if (spec.is_block()) {
    const auto& b = std::get<BlockArchitecture>(arch);
    const auto& choices = spec.block_dims().choices;
    if (b.choices.size() != choices.size()) throw Error(ErrorKind::SpaceMismatch, "choice vector length mismatch");
    std::size_t offset = 0;
    for (std::size_t l = 0; l < choices.size(); ++l) {
      e[offset + b.choices[l].value] = 1.0;
      offset += static_cast<std::size_t>(choices[l]);
    }
    return e;
  }

  const auto& c = std::get<CellArchitecture>(arch);
  const int frame = spec.cell_dims().max_nodes;
  const int n = c.num_nodes();
  auto slot = [&](int i) { return i == n - 1 ? frame - 1 : i; };
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> index(static_cast<std::size_t>(frame),
                                              std::vector<std::size_t>(static_cast<std::size_t>(frame)));
  for (int i = 0; i < frame; ++i)
    for (int j = i + 1; j < frame; ++j) index[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k++;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (c.has_edge(i, j)) e[index[static_cast<std::size_t>(slot(i))][static_cast<std::size_t>(slot(j))]] = 1.0;
    }
  }
  const auto& inner = spec.intermediate_ops();
  const std::size_t group = inner.size() + 1;
  for (int s = 1; s + 1 < frame; ++s) {
    const std::size_t base = k + static_cast<std::size_t>(s - 1) * group;
    if (s < n - 1) {
      const auto rank = static_cast<std::size_t>(std::lower_bound(inner.begin(), inner.end(), c.op(s)) - inner.begin());
      e[base + rank] = 1.0;
    } else {
      e[base + inner.size()] = 1.0;  // absent
    }
  }
  return e;
}

RidgePredictor::RidgePredictor(SpaceSpec spec, std::vector<double> weights, double bias, double lambda)
    : spec_(std::move(spec)), weights_(std::move(weights)), bias_(bias), lambda_(lambda) {
  if (weights_.size() != embedding_length(spec_)) {
    throw Error(ErrorKind::InvalidArgument, "ridge weight length differs from embedding length");
  }
}

double RidgePredictor::raw_score(const Architecture& arch) const {
  const auto e = embed(arch, spec_);
  double s = bias_;
  for (std::size_t i = 0; i < e.size(); ++i) s += weights_[i] * e[i];
  return s;
}

double RidgePredictor::predict(const Architecture& arch) const { return std::clamp(raw_score(arch), 0.0, 1.0); }

std::string RidgePredictor::to_json() const {
  nlohmann::json j;
  j["kind"] = "ridge";
  j["lambda"] = lambda_;
  j["bias"] = bias_;
  j["weights"] = weights_;
  j["space"] = nlohmann::json::parse(spec_to_json(spec_));
  return j.dump(2) + "\n";
}

RidgePredictor RidgePredictor::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "ridge") throw Error(ErrorKind::ParseError, "predictor kind must be ridge");
    return RidgePredictor(spec_from_json(j.at("space").dump()), j.at("weights").get<std::vector<double>>(),
                          j.at("bias").get<double>(), j.at("lambda").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("predictor JSON: ") + e.what());
  }
}

RidgePredictor fit_ridge(const std::vector<std::pair<Architecture, double>>& pairs, const SpaceSpec& spec,
                         double lambda, const std::vector<double>& sample_weights) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "ridge fit needs at least one pair");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
  if (!sample_weights.empty() && sample_weights.size() != pairs.size()) {
    throw Error(ErrorKind::LengthMismatch, "sample weights length differs from pair count");
  }
  const auto m = static_cast<Eigen::Index>(pairs.size());
  const auto p = static_cast<Eigen::Index>(embedding_length(spec));

  Eigen::MatrixXd x(m, p);
  Eigen::VectorXd y(m);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& [arch, acc] = pairs[static_cast<std::size_t>(i)];
    const auto e = embed(arch, spec);
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(e.data(), p);
    y(i) = acc;
    if (!sample_weights.empty()) s(i) = sample_weights[static_cast<std::size_t>(i)];
  }
  if ((s.array() < 0.0).any() || s.sum() <= 0.0) throw Error(ErrorKind::InvalidArgument, "sample weights must be >= 0 with positive sum");

  const double total = s.sum();
  const Eigen::RowVectorXd x_mean = (s.transpose() * x) / total;
  const double y_mean = s.dot(y) / total;
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * s.asDiagonal() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = xc.transpose() * (s.asDiagonal() * yc);

  Eigen::VectorXd w;
  if (lambda > 0.0) {
    w = gram.ldlt().solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
      throw Error(ErrorKind::SingularSystem, "normal equations are rank deficient (rank " +
                                                 std::to_string(qr.rank()) + " < " + std::to_string(p) + ")");
    }
    w = qr.solve(rhs);
  }
  const double bias = y_mean - x_mean.dot(w);
  return RidgePredictor(spec, std::vector<double>(w.data(), w.data() + w.size()), bias, lambda);
}

void save_predictor(const RidgePredictor& predictor, const std::string& path) {
  csv::write_file(path, predictor.to_json());
}

RidgePredictor load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open predictor '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return RidgePredictor::from_json(buf.str());
}

}  // namespace lissnas
