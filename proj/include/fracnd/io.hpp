#pragma once

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fracnd/lmi.hpp"
#include "fracnd/model.hpp"

/// JSON input/output. Parsing is strict: unknown fields are rejected, and
/// every error names the offending field. Serialization is canonical:
/// object keys are emitted sorted and floating-point values use the
/// shortest representation that round-trips, so equal inputs always yield
/// byte-identical text. Fingerprints hash that canonical form.

namespace fracnd {

using Json = nlohmann::json;

namespace detail {

inline void check_fields(const Json& obj, const std::string& who,
                         std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional) {
  if (!obj.is_object())
    throw std::invalid_argument(who + ": expected a JSON object");
  for (const char* key : required)
    if (!obj.contains(key))
      throw std::invalid_argument(who + ": missing field '" + key + "'");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : required)
      if (item.key() == key) known = true;
    for (const char* key : optional)
      if (item.key() == key) known = true;
    if (!known)
      throw std::invalid_argument(who + ": unknown field '" + item.key() + "'");
  }
}

}  // namespace detail

/// Dense real matrix from an array of equal-length rows of numbers.
inline Eigen::MatrixXd real_matrix_from_json(const Json& j,
                                             const std::string& who) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(who + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.empty())
      throw std::invalid_argument(who + ": rows must be non-empty arrays");
    if (r == 0)
      cols = row.size();
    else if (row.size() != cols)
      throw std::invalid_argument(who + ": rows must have equal length");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& v = j[r][c];
      if (!v.is_number())
        throw std::invalid_argument(who + ": entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          v.get<double>();
    }
  return m;
}

inline Json real_matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Complex matrix as {"re": rows, "im": rows}; "im" may be omitted for a
/// real-valued matrix.
inline Eigen::MatrixXcd complex_matrix_from_json(const Json& j,
                                                 const std::string& who) {
  detail::check_fields(j, who, {"re"}, {"im"});
  const Eigen::MatrixXd re = real_matrix_from_json(j["re"], who + ".re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_matrix_from_json(j["im"], who + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols())
      throw std::invalid_argument(who + ": re and im must have equal shape");
  }
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

inline Json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
  Json out = Json::object();
  out["re"] = real_matrix_to_json(m.real());
  out["im"] = real_matrix_to_json(m.imag());
  return out;
}

/// Model schema: {"nu", "dims", "r", "A"} with optional {"B", "C", "D"}.
/// The parsed model is validated before being returned.
inline HybridRoesserModel model_from_json(const Json& j) {
  detail::check_fields(j, "model", {"nu", "dims", "r", "A"}, {"B", "C", "D"});
  HybridRoesserModel m;
  if (!j["nu"].is_number())
    throw std::invalid_argument("nu: expected a number");
  m.nu = j["nu"].get<double>();
  if (!j["dims"].is_array() || j["dims"].empty())
    throw std::invalid_argument("dims: expected a non-empty array");
  for (const auto& d : j["dims"]) {
    if (!d.is_number_integer())
      throw std::invalid_argument("dims: entries must be integers");
    m.dims.push_back(d.get<int>());
  }
  if (!j["r"].is_number_integer())
    throw std::invalid_argument("r: expected an integer");
  m.r = j["r"].get<int>();
  m.a = real_matrix_from_json(j["A"], "A");
  if (j.contains("B")) m.b = real_matrix_from_json(j["B"], "B");
  if (j.contains("C")) m.c = real_matrix_from_json(j["C"], "C");
  if (j.contains("D")) m.d = real_matrix_from_json(j["D"], "D");
  validate_model(m);
  return m;
}

inline HybridRoesserModel parse_model_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("model: invalid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline Json model_to_json(const HybridRoesserModel& m) {
  Json j = Json::object();
  j["nu"] = m.nu;
  j["dims"] = m.dims;
  j["r"] = m.r;
  j["A"] = real_matrix_to_json(m.a);
  if (m.b) j["B"] = real_matrix_to_json(*m.b);
  if (m.c) j["C"] = real_matrix_to_json(*m.c);
  if (m.d) j["D"] = real_matrix_to_json(*m.d);
  return j;
}

/// Canonical text form: sorted keys, shortest round-trip numbers, no
/// whitespace. Equal models serialize to byte-identical strings.
inline std::string canonical_model_json(const HybridRoesserModel& m) {
  return model_to_json(m).dump();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Stable content identifier of a model: the FNV-1a 64-bit hash of its
/// canonical serialization, formatted as "fnv1a64:<16 hex digits>".
inline std::string model_fingerprint(const HybridRoesserModel& m) {
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a64(canonical_model_json(m));
  return os.str();
}

/// Certificate schema: {"form", "U"} with optional {"V", "J", "R"}.
/// U and V are arrays of complex matrices; the multiplier field must match
/// the form (J for theorem2/corollary1, R for corollary2).
inline StabilityCertificate certificate_from_json(const Json& j) {
  detail::check_fields(j, "certificate", {"form", "U"}, {"V", "J", "R"});
  StabilityCertificate cert;
  if (!j["form"].is_string())
    throw std::invalid_argument("form: expected a string");
  cert.form = certificate_form_from_string(j["form"].get<std::string>());
  const bool wants_r = cert.form == CertificateForm::Corollary2;
  if (wants_r && j.contains("J"))
    throw std::invalid_argument("J: not used by the corollary2 form");
  if (!wants_r && j.contains("R"))
    throw std::invalid_argument("R: only used by the corollary2 form");
  if (!j["U"].is_array() || j["U"].empty())
    throw std::invalid_argument("U: expected a non-empty array of matrices");
  for (std::size_t i = 0; i < j["U"].size(); ++i)
    cert.u.push_back(complex_matrix_from_json(
        j["U"][i], "U[" + std::to_string(i) + "]"));
  if (j.contains("V")) {
    if (!j["V"].is_array())
      throw std::invalid_argument("V: expected an array of matrices");
    for (std::size_t i = 0; i < j["V"].size(); ++i)
      cert.v.push_back(complex_matrix_from_json(
          j["V"][i], "V[" + std::to_string(i) + "]"));
  }
  if (j.contains("J")) cert.j = complex_matrix_from_json(j["J"], "J");
  if (j.contains("R")) cert.r = complex_matrix_from_json(j["R"], "R");
  return cert;
}

inline StabilityCertificate parse_certificate_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("certificate: invalid JSON: ") +
                                e.what());
  }
  return certificate_from_json(j);
}

inline Json certificate_to_json(const StabilityCertificate& cert) {
  Json j = Json::object();
  j["form"] = to_string(cert.form);
  Json u = Json::array();
  for (const auto& ui : cert.u) u.push_back(complex_matrix_to_json(ui));
  j["U"] = std::move(u);
  Json v = Json::array();
  for (const auto& vi : cert.v) v.push_back(complex_matrix_to_json(vi));
  j["V"] = std::move(v);
  if (cert.j) j["J"] = complex_matrix_to_json(*cert.j);
  if (cert.r) j["R"] = complex_matrix_to_json(*cert.r);
  return j;
}

/// Parses one complex value written as "a", "bj", "a+bj" or "a-bj" (the
/// suffix "i" is accepted as well). A bare "+j"/"-j"/"j" means a unit
/// imaginary part.
inline Complex parse_complex(const std::string& text) {
  std::string s;
  for (const char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s.push_back(c == 'i' ? 'j' : c);
  if (s.empty()) throw std::invalid_argument("point: empty complex value");

  const auto parse_double = [](const std::string& part,
                               const char* who) -> double {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size())
        throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(who) +
                                  ": malformed complex value");
    }
  };

  if (s.back() != 'j') return {parse_double(s, "point"), 0.0};

  std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that does not belong to an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') &&
        body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, parse_double(body, "point")};
  }
  const std::string re_part = body.substr(0, split);
  std::string im_part = body.substr(split);
  if (im_part == "+") im_part = "1";
  if (im_part == "-") im_part = "-1";
  return {parse_double(re_part, "point"), parse_double(im_part, "point")};
}

}  // namespace fracnd
