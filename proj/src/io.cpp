#include "rsw/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "rsw/error.hpp"

namespace rsw::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

json to_json(const ErgodicityReport<double>& r) {
  return {{"eta", number(r.eta)},
          {"diagonal", vector_json(r.diagonal)},
          {"stationary", vector_json(r.stationary)},
          {"remark_mean_negative", r.remark.mean_negative},
          {"remark_min_ratio", r.remark.min_ratio},
          {"verdict", r.verdict}};
}

json to_json(const Example1Report& r) {
  auto root = [](std::complex<double> z) { return json{{"re", number(z.real())}, {"im", number(z.imag())}}; };
  return {{"alpha", number(r.alpha)},
          {"beta", number(r.beta)},
          {"roots", json::array({root(r.root1), root(r.root2)})},
          {"max_real_root", number(r.max_real_root)},
          {"eta", number(r.eta)},
          {"satisfied", r.satisfied},
          {"consistent", r.consistent}};
}

json to_json(const RateFit& f) {
  return {{"rate", number(f.rate)},
          {"intercept", number(f.intercept)},
          {"ci_halfwidth", number(f.ci_halfwidth)},
          {"window", json::array({number(f.t_lo), number(f.t_hi)})},
          {"n_points", f.n_points}};
}

json to_json(const DecaySeries& s) {
  json times = json::array(), means = json::array(), se = json::array();
  for (std::size_t k = 0; k < s.size(); ++k) {
    times.push_back(number(s.times[k]));
    means.push_back(number(s.means[k]));
    se.push_back(number(s.std_errors[k]));
  }
  return {{"times", times}, {"means", means}, {"std_errors", se}, {"n_paths", s.n_paths}};
}

json to_json(const RegimePath& p) {
  return {{"initial_state", p.initial_state},
          {"horizon", p.horizon},
          {"jump_times", p.jump_times},
          {"states", p.states}};
}

RegimePath regime_path_from_json(const json& j) {
  RegimePath p;
  p.initial_state = j.at("initial_state").get<int>();
  p.horizon = j.at("horizon").get<double>();
  p.jump_times = j.at("jump_times").get<std::vector<double>>();
  p.states = j.at("states").get<std::vector<int>>();
  if (p.jump_times.size() != p.states.size()) throw Error(ErrorCode::ShapeMismatch, "jump_times vs states length");
  return p;
}

std::string regime_path_csv(const RegimePath& p) {
  std::vector<std::vector<std::string>> rows{{format_double(0.0), std::to_string(p.initial_state)}};
  for (std::size_t k = 0; k < p.n_jumps(); ++k) rows.push_back({format_double(p.jump_times[k]), std::to_string(p.states[k])});
  return csv_table({"time", "state"}, rows);
}

json to_json(const Segment& s) {
  return {{"tau", s.tau()},
          {"delta", s.delta()},
          {"m", s.m()},
          {"values", matrix_json(s.values())},
          {"pre_history", vector_json(s.pre_history())},
          {"pushes", s.pushes()}};
}

Segment segment_from_json(const json& j) {
  const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw Error(ErrorCode::ShapeMismatch, "segment has no knots");
  Eigen::MatrixXd knots(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw Error(ErrorCode::ShapeMismatch, "ragged segment values");
    for (std::size_t c = 0; c < rows[r].size(); ++c) knots(r, c) = rows[r][c];
  }
  Segment s = Segment::from_values(knots, j.at("tau").get<double>());
  if (j.contains("pre_history")) {
    const auto pre = j.at("pre_history").get<std::vector<double>>();
    s.restore_pre_history(Eigen::Map<const Eigen::VectorXd>(pre.data(), static_cast<Eigen::Index>(pre.size())),
                          j.value("pushes", 0L));
  }
  return s;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& t) {
  std::vector<std::string> header{"time", "regime"};
  for (Eigen::Index c = 0; c < t.values.cols(); ++c) header.push_back("x" + std::to_string(c));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{format_double(t.time(k)), std::to_string(t.regimes[k])};
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) row.push_back(format_double(t.values(k, c)));
    rows.push_back(std::move(row));
  }
  return csv_table(header, rows);
}

std::string series_csv(const DecaySeries& s) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < s.size(); ++k) {
    rows.push_back({format_double(s.times[k]), format_double(s.means[k]), format_double(s.std_errors[k]),
                    std::to_string(s.n_paths)});
  }
  return csv_table({"t", "mean", "std_error", "n"}, rows);
}

}  // namespace rsw::io
