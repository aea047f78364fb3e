#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mdl/characters.hpp"

namespace mdl {

BoundedSequence parse_periodic_sequence(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("periodic sequence: bad JSON: ") +
                                e.what());
  }
  if (!doc.contains("period") || !doc["period"].is_number_unsigned())
    throw std::invalid_argument(
        "periodic sequence: \"period\" must be a positive integer");
  if (!doc.contains("values") || !doc["values"].is_array())
    throw std::invalid_argument(
        "periodic sequence: \"values\" must be an array of [re, im] pairs");
  const auto period = doc["period"].get<std::uint64_t>();
  const auto& vals = doc["values"];
  if (period == 0 || vals.size() != period)
    throw std::invalid_argument(
        "periodic sequence: \"values\" length must equal \"period\"");
  std::vector<cplx> values;
  values.reserve(period);
  for (const auto& v : vals) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
      throw std::invalid_argument(
          "periodic sequence: each value must be an [re, im] pair");
    values.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return BoundedSequence::periodic_table(std::move(values));
}

BoundedSequence load_periodic_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("periodic sequence: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_periodic_sequence(buf.str());
}

} // namespace mdl
