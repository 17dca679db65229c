#include <liestab/config.hpp>

#include <liestab/errors.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace liestab {

double sig12(double x)
{
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
  throw InputError(path + ": " + msg);
}

double get_number(const Json& j, const std::string& path)
{
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return sig12(v);
}

double get_positive(const Json& j, const std::string& path)
{
  const double v = get_number(j, path);
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int get_int(const Json& j, const std::string& path)
{
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::vector<double> get_number_list(const Json& j, const std::string& path)
{
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix get_matrix(const Json& j, const std::string& path)
{
  if (!j.is_array() || j.empty()) fail(path, "expected a list of matrix rows");
  const std::size_t rows = j.size();
  Matrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = get_number_list(j[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) {
      if (row.size() != rows) fail(path, "matrix must be square");
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(row.size()));
    } else if (row.size() != static_cast<std::size_t>(m.cols())) {
      fail(path + "[" + std::to_string(r) + "]", "row length differs from the first row");
    }
    for (std::size_t c = 0; c < row.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

void reject_unknown(const Json& j, const std::string& path,
                    std::initializer_list<const char*> known)
{
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (item.key() == k) ok = true;
    if (!ok) fail(path + "." + item.key(), "unknown field");
  }
}

} // namespace

RunConfig RunConfig::from_json(const Json& doc)
{
  if (!doc.is_object()) throw InputError("config: expected a JSON object");
  reject_unknown(doc, "config",
                 {"modes", "step", "tolerances", "signal", "entropy", "trajectories",
                  "fit_window", "outputs"});

  RunConfig cfg;
  if (!doc.contains("modes")) fail("modes", "required field missing");
  const Json& modes = doc["modes"];
  if (!modes.is_array() || modes.empty()) fail("modes", "expected a non-empty list of matrices");
  for (std::size_t p = 0; p < modes.size(); ++p) {
    Matrix m = get_matrix(modes[p], "modes[" + std::to_string(p) + "]");
    if (p > 0 && m.rows() != cfg.modes[0].rows())
      fail("modes[" + std::to_string(p) + "]", "dimension differs from modes[0]");
    cfg.modes.push_back(std::move(m));
  }
  const int n = cfg.n();

  if (doc.contains("step")) cfg.step = get_positive(doc["step"], "step");

  if (doc.contains("tolerances")) {
    const Json& t = doc["tolerances"];
    if (!t.is_object()) fail("tolerances", "expected an object");
    reject_unknown(t, "tolerances", {"rank", "ode", "split"});
    if (t.contains("rank")) cfg.tolerances.rank = get_positive(t["rank"], "tolerances.rank");
    if (t.contains("ode")) cfg.tolerances.ode = get_positive(t["ode"], "tolerances.ode");
    if (t.contains("split")) cfg.tolerances.split = get_positive(t["split"], "tolerances.split");
  }

  if (doc.contains("signal")) {
    const Json& s = doc["signal"];
    if (!s.is_object()) fail("signal", "expected an object");
    reject_unknown(s, "signal", {"seed", "switch_rate", "horizon", "count"});
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer()) fail("signal.seed", "expected an integer");
      cfg.signal.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("switch_rate")) {
      cfg.signal.switch_rate = get_number(s["switch_rate"], "signal.switch_rate");
      if (cfg.signal.switch_rate < 0.0) fail("signal.switch_rate", "must be nonnegative");
    }
    if (s.contains("horizon"))
      cfg.signal.horizon = get_positive(s["horizon"], "signal.horizon");
    if (s.contains("count")) {
      cfg.signal.count = get_int(s["count"], "signal.count");
      if (cfg.signal.count < 1) fail("signal.count", "must be at least 1");
    }
  }

  cfg.entropy.center = Vector::Zero(n);
  cfg.entropy.half_widths = Vector::Constant(n, 0.5);
  if (doc.contains("entropy")) {
    const Json& e = doc["entropy"];
    if (!e.is_object()) fail("entropy", "expected an object");
    reject_unknown(e, "entropy",
                   {"center", "half_widths", "grid_resolution", "epsilons", "horizons",
                    "time_samples", "channel"});
    if (e.contains("center")) {
      const auto v = get_number_list(e["center"], "entropy.center");
      if (static_cast<int>(v.size()) != n) fail("entropy.center", "dimension must match modes");
      cfg.entropy.center = Eigen::Map<const Vector>(v.data(), n);
    }
    if (e.contains("half_widths")) {
      const auto v = get_number_list(e["half_widths"], "entropy.half_widths");
      if (static_cast<int>(v.size()) != n)
        fail("entropy.half_widths", "dimension must match modes");
      for (double w : v)
        if (!(w > 0.0)) fail("entropy.half_widths", "entries must be positive");
      cfg.entropy.half_widths = Eigen::Map<const Vector>(v.data(), n);
    }
    if (e.contains("grid_resolution")) {
      cfg.entropy.grid_resolution = get_int(e["grid_resolution"], "entropy.grid_resolution");
      if (cfg.entropy.grid_resolution < 2) fail("entropy.grid_resolution", "must be at least 2");
    }
    if (e.contains("epsilons")) {
      cfg.entropy.epsilons = get_number_list(e["epsilons"], "entropy.epsilons");
      if (cfg.entropy.epsilons.size() < 2) fail("entropy.epsilons", "need at least 2 values");
      for (double v : cfg.entropy.epsilons)
        if (!(v > 0.0)) fail("entropy.epsilons", "entries must be positive");
    }
    if (e.contains("horizons")) {
      cfg.entropy.horizons = get_number_list(e["horizons"], "entropy.horizons");
      if (cfg.entropy.horizons.size() < 3) fail("entropy.horizons", "need at least 3 values");
    }
    if (e.contains("time_samples")) {
      cfg.entropy.time_samples = get_int(e["time_samples"], "entropy.time_samples");
      if (cfg.entropy.time_samples < 2) fail("entropy.time_samples", "must be at least 2");
    }
    if (e.contains("channel")) {
      if (!e["channel"].is_string()) fail("entropy.channel", "expected a string");
      cfg.entropy.channel = e["channel"].get<std::string>();
      if (cfg.entropy.channel != "semi_simple" && cfg.entropy.channel != "full")
        fail("entropy.channel", "must be \"semi_simple\" or \"full\"");
    }
  }
  if (cfg.entropy.horizons.empty()) {
    for (double f : {0.25, 0.5, 0.75, 1.0})
      cfg.entropy.horizons.push_back(sig12(f * cfg.signal.horizon));
  }
  for (double h : cfg.entropy.horizons)
    if (!(h > 0.0) || h > cfg.signal.horizon + 1e-12)
      fail("entropy.horizons", "values must lie in (0, signal.horizon]");

  if (doc.contains("trajectories")) {
    cfg.trajectories = get_int(doc["trajectories"], "trajectories");
    if (cfg.trajectories < 10) fail("trajectories", "must be at least 10");
  }
  if (doc.contains("fit_window")) {
    cfg.fit_window = get_number(doc["fit_window"], "fit_window");
    if (!(cfg.fit_window > 0.0) || cfg.fit_window > 1.0)
      fail("fit_window", "must lie in (0, 1]");
  }
  if (doc.contains("outputs")) {
    if (!doc["outputs"].is_string()) fail("outputs", "expected a string");
    cfg.outputs = doc["outputs"].get<std::string>();
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("config parse: ") + e.what());
  }
  return from_json(doc);
}

Json matrix_to_json(const Matrix& m)
{
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(sig12(m(i, j)));
  return out;
}

Json RunConfig::to_json() const
{
  Json doc;
  doc["modes"] = Json::array();
  for (const Matrix& m : modes) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(sig12(m(i, j)));
      rows.push_back(std::move(row));
    }
    doc["modes"].push_back(std::move(rows));
  }
  doc["step"] = sig12(step);
  doc["tolerances"] = {{"rank", sig12(tolerances.rank)},
                       {"ode", sig12(tolerances.ode)},
                       {"split", sig12(tolerances.split)}};
  doc["signal"] = {{"seed", signal.seed},
                   {"switch_rate", sig12(signal.switch_rate)},
                   {"horizon", sig12(signal.horizon)},
                   {"count", signal.count}};
  Json ent;
  ent["center"] = Json::array();
  for (Eigen::Index i = 0; i < entropy.center.size(); ++i)
    ent["center"].push_back(sig12(entropy.center(i)));
  ent["half_widths"] = Json::array();
  for (Eigen::Index i = 0; i < entropy.half_widths.size(); ++i)
    ent["half_widths"].push_back(sig12(entropy.half_widths(i)));
  ent["grid_resolution"] = entropy.grid_resolution;
  ent["epsilons"] = Json::array();
  for (double e : entropy.epsilons) ent["epsilons"].push_back(sig12(e));
  ent["horizons"] = Json::array();
  for (double h : entropy.horizons) ent["horizons"].push_back(sig12(h));
  ent["time_samples"] = entropy.time_samples;
  ent["channel"] = entropy.channel;
  doc["entropy"] = std::move(ent);
  doc["trajectories"] = trajectories;
  doc["fit_window"] = sig12(fit_window);
  doc["outputs"] = outputs;
  return doc;
}

} // namespace liestab
