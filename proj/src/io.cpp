#include "polyamix/io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace polyamix {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kDrawsFormat = "polyamix-draws";
constexpr const char* kMixturesFormat = "polyamix-mixtures";

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json config_to_json(const ModelConfig& c) {
  return json{{"mu_mean", c.mu_mean},         {"mu_var", c.mu_var},
              {"tau_shape", c.tau_shape},     {"tau_scale", c.tau_scale},
              {"alpha_shape", c.alpha_shape}, {"alpha_rate", c.alpha_rate},
              {"var_shape", c.var_shape},     {"var_scale", c.var_scale},
              {"fix_alpha", optional_to_json(c.fix_alpha)},
              {"fix_mu", optional_to_json(c.fix_mu)},
              {"fix_tau", optional_to_json(c.fix_tau)},
              {"remix", c.remix},
              {"iterations", c.iterations},
              {"burnin", c.burnin},
              {"thin", c.thin},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.mu_mean = j.at("mu_mean").get<double>();
  c.mu_var = j.at("mu_var").get<double>();
  c.tau_shape = j.at("tau_shape").get<double>();
  c.tau_scale = j.at("tau_scale").get<double>();
  c.alpha_shape = j.at("alpha_shape").get<double>();
  c.alpha_rate = j.at("alpha_rate").get<double>();
  c.var_shape = j.at("var_shape").get<double>();
  c.var_scale = j.at("var_scale").get<double>();
  c.fix_alpha = optional_from_json(j.at("fix_alpha"));
  c.fix_mu = optional_from_json(j.at("fix_mu"));
  c.fix_tau = optional_from_json(j.at("fix_tau"));
  c.remix = j.at("remix").get<bool>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.burnin = j.at("burnin").get<std::size_t>();
  c.thin = j.at("thin").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json components_to_json(std::span<const Component> cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back(json::array({c.mean, c.variance}));
  return out;
}

std::vector<Component> components_from_json(const json& j) {
  std::vector<Component> out;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw FormatError("component must be [mean, variance]");
    out.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return out;
}

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
  }
}

json read_header(std::istream& in, const char* expected_format) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty file");
  json h = parse_line(line, 1);
  if (!h.is_object() || h.value("record", "") != "header") {
    throw FormatError("first record is not a header");
  }
  if (h.value("format", "") != expected_format) {
    throw FormatError("expected a " + std::string(expected_format) + " file, found '" +
                      h.value("format", "") + "'");
  }
  if (h.value("format_version", "") != kFormatVersion) {
    throw FormatError("unsupported format version '" + h.value("format_version", "") + "'");
  }
  if (h.value("model", "") != kModelTag) {
    throw FormatError("unrecognised model family '" + h.value("model", "") + "'");
  }
  return h;
}

// Calls fn(record, lineno) for every non-blank line after the header.
template <typename Fn>
void for_each_record(std::istream& in, Fn fn) {
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_line(line, lineno), lineno);
  }
}

void write_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace

std::vector<double> read_data_text(std::istream& in) {
  std::vector<double> data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::string extra;
    if (fields >> extra) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected one value per line");
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw ValidationError("line " + std::to_string(lineno) + ": not a finite number: '" +
                            token + "'");
    }
    data.push_back(v);
  }
  return data;
}

void write_draws(std::ostream& out, const DrawsFile& file) {
  write_line(out, json{{"record", "header"},
                       {"format", kDrawsFormat},
                       {"format_version", kFormatVersion},
                       {"model", kModelTag},
                       {"source", file.source},
                       {"seed", file.config.seed},
                       {"n", file.data.size()},
                       {"T", file.draws.size()},
                       {"config", config_to_json(file.config)},
                       {"data", file.data}});
  for (std::size_t t = 0; t < file.draws.size(); ++t) {
    const auto& d = file.draws[t];
    const DistinctComponents distinct = distinct_components(d.thetas);
    write_line(out, json{{"record", "draw"},
                         {"t", t},
                         {"mu", d.mu},
                         {"tau", d.tau},
                         {"alpha", d.alpha},
                         {"k", distinct.components.size()},
                         {"components", components_to_json(distinct.components)},
                         {"labels", distinct.labels}});
  }
}

DrawsFile read_draws(std::istream& in) {
  DrawsFile file;
  std::size_t expected = 0;
  try {
    const json h = read_header(in, kDrawsFormat);
    file.source = h.value("source", "");
    file.config = config_from_json(h.at("config"));
    file.data = h.at("data").get<std::vector<double>>();
    expected = h.at("T").get<std::size_t>();
    if (h.at("n").get<std::size_t>() != file.data.size()) throw FormatError("header n mismatch");

    for_each_record(in, [&](const json& r, std::size_t lineno) {
      if (r.value("record", "") != "draw") {
        throw FormatError("line " + std::to_string(lineno) + ": expected a draw record");
      }
      PosteriorDraw d;
      d.mu = r.at("mu").get<double>();
      d.tau = r.at("tau").get<double>();
      d.alpha = r.at("alpha").get<double>();
      const auto comps = components_from_json(r.at("components"));
      const auto labels = r.at("labels").get<std::vector<std::size_t>>();
      if (labels.size() != file.data.size()) {
        throw FormatError("line " + std::to_string(lineno) + ": label count differs from n");
      }
      for (auto l : labels) {
        if (l >= comps.size()) throw FormatError("line " + std::to_string(lineno) + ": bad label");
        d.thetas.push_back(comps[l]);
      }
      d.k = comps.size();
      file.draws.push_back(std::move(d));
    });
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed draws file: ") + e.what());
  }
  if (file.draws.size() != expected) throw FormatError("draw count differs from header T");
  return file;
}

void write_mixtures(std::ostream& out, const MixturesFile& file) {
  write_line(out, json{{"record", "header"},
                       {"format", kMixturesFormat},
                       {"format_version", kFormatVersion},
                       {"model", kModelTag},
                       {"source", file.source},
                       {"seed", file.completion.seed},
                       {"n", file.data.size()},
                       {"T", file.mixtures.size()},
                       {"completion",
                        {{"eps", file.completion.eps},
                         {"ups", file.completion.ups},
                         {"seed", file.completion.seed}}},
                       {"config", config_to_json(file.model)},
                       {"data", file.data}});
  for (std::size_t t = 0; t < file.mixtures.size(); ++t) {
    const auto& m = file.mixtures[t];
    write_line(out, json{{"record", "mixture"},
                         {"t", t},
                         {"provenance", to_string(m.provenance)},
                         {"truncation", m.truncation},
                         {"stick_mass", m.stick_mass},
                         {"weights", m.weights},
                         {"components", components_to_json(m.components)}});
  }
}

MixturesFile read_mixtures(std::istream& in) {
  MixturesFile file;
  std::size_t expected = 0;
  try {
    const json h = read_header(in, kMixturesFormat);
    file.source = h.value("source", "");
    file.model = config_from_json(h.at("config"));
    file.data = h.at("data").get<std::vector<double>>();
    const auto& c = h.at("completion");
    file.completion = {c.at("eps").get<double>(), c.at("ups").get<double>(),
                       c.at("seed").get<std::uint64_t>()};
    expected = h.at("T").get<std::size_t>();

    for_each_record(in, [&](const json& r, std::size_t lineno) {
      if (r.value("record", "") != "mixture") {
        throw FormatError("line " + std::to_string(lineno) + ": expected a mixture record");
      }
      MixtureDensity m;
      m.provenance = provenance_from_string(r.at("provenance").get<std::string>());
      m.truncation = r.at("truncation").get<std::size_t>();
      m.stick_mass = r.at("stick_mass").get<double>();
      m.weights = r.at("weights").get<std::vector<double>>();
      m.components = components_from_json(r.at("components"));
      if (m.weights.size() != m.components.size()) {
        throw FormatError("line " + std::to_string(lineno) + ": weights/components mismatch");
      }
      file.mixtures.push_back(std::move(m));
    });
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed mixtures file: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  if (file.mixtures.size() != expected) throw FormatError("mixture count differs from header T");
  return file;
}

FileKind peek_kind(const std::string& header_line) {
  json h;
  try {
    h = json::parse(header_line);
  } catch (const json::exception&) {
    throw FormatError("header is not JSON");
  }
  const std::string format = h.is_object() ? h.value("format", "") : "";
  if (format == kDrawsFormat) return FileKind::draws;
  if (format == kMixturesFormat) return FileKind::mixtures;
  throw FormatError("unrecognised file format '" + format + "'");
}

}  // namespace polyamix
