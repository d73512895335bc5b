#ifndef RSW_IO_HPP
#define RSW_IO_HPP

// JSON and CSV encodings of the library's value types. Doubles are written
// in shortest round-trip form, so every encoding reads back bit-exactly.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "rsw/chain.hpp"
#include "rsw/ergodics.hpp"
#include "rsw/generator.hpp"
#include "rsw/sde.hpp"
#include "rsw/segment.hpp"
#include "rsw/series.hpp"

namespace rsw::io {

using nlohmann::json;

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);

json vector_json(const Eigen::VectorXd& v);
json matrix_json(const Eigen::MatrixXd& m);
/// Non-finite doubles become null (JSON has no encoding for them).
json number(double x);

json to_json(const ErgodicityReport<double>& r);
json to_json(const Example1Report& r);
json to_json(const RateFit& f);
json to_json(const DecaySeries& s);

json to_json(const RegimePath& p);
RegimePath regime_path_from_json(const json& j);
std::string regime_path_csv(const RegimePath& p);

json to_json(const Segment& s);
Segment segment_from_json(const json& j);

/// time, regime, x0, x1, ...
std::string trajectory_csv(const Trajectory& t);
/// t, mean, std_error, n
std::string series_csv(const DecaySeries& s);

/// Header row plus rows of preformatted cells.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace rsw::io

#endif  // RSW_IO_HPP
