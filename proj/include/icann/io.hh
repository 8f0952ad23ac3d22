#pragma once

/**
 * \file io.hh
 * \brief Flat `key = value` files (weights, run configs), dataset CSVs with
 * metadata sidecars, and result export.
 *
 * Weight files name each weight `<branch>.<net>.<weight>`, for example
 * `neq1.psi.w2_1`, `neq2.g.w2_7_tilde` or `eq.psi.w1_1`, and carry the
 * topology in the header keys `branches`, `equilibrium` and `potential`;
 * `neqK.potential` overrides the variant of a single branch.
 */

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <icann/errors.hh>
#include <icann/loading_protocols.hh>
#include <icann/training.hh>
#include <icann/viscoelastic_model.hh>

namespace icann::io {

namespace fs = std::filesystem;

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Parses a finite or non-finite double; throws IoError naming `where`.
inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v      = 0.0;
  const auto r  = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw IoError(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

// Key-value files -------------------------------------------------------------

struct KeyValue
{
  std::string value;
  int line = 0;
};

/// Ordered `key = value` pairs; `#` starts a comment, blank lines are skipped.
class KeyValueFile
{
public:
  static KeyValueFile parse(std::istream& in, const std::string& source) {
    KeyValueFile f;
    f.source_ = source;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      std::string_view s = line;
      if (const auto h = s.find('#'); h != std::string_view::npos)
        s = s.substr(0, h);
      s = trim(s);
      if (s.empty())
        continue;
      const auto eq = s.find('=');
      if (eq == std::string_view::npos)
        throw IoError(source + ":" + std::to_string(n) + ": expected 'key = value'");
      std::string key(trim(s.substr(0, eq)));
      if (key.empty())
        throw IoError(source + ":" + std::to_string(n) + ": empty key");
      if (f.entries_.count(key))
        throw IoError(source + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
      f.order_.push_back(key);
      f.entries_[key] = {std::string(trim(s.substr(eq + 1))), n};
    }
    return f;
  }

  static KeyValueFile load(const fs::path& p) {
    std::ifstream in(p);
    if (!in)
      throw IoError("cannot open " + p.string());
    return parse(in, p.string());
  }

  const std::string& source() const { return source_; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::vector<std::string>& keys() const { return order_; }

  const std::string& get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
      throw ConfigError(source_ + ": missing key '" + key + "'");
    used_.insert(key);
    return it->second.value;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
  double number(const std::string& key) const { return parse_double(get(key), where(key)); }
  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  long integer_or(const std::string& key, long fallback) const {
    if (!has(key))
      return fallback;
    const std::string& s = get(key);
    long v               = 0;
    const auto r         = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw ConfigError(where(key) + ": expected an integer, got '" + s + "'");
    return v;
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key))
      return fallback;
    const std::string& s = get(key);
    if (s == "true" || s == "yes" || s == "1")
      return true;
    if (s == "false" || s == "no" || s == "0")
      return false;
    throw ConfigError(where(key) + ": expected true or false, got '" + s + "'");
  }

  /// Keys never read through get(); lets callers reject typos.
  std::vector<std::string> unused() const {
    std::vector<std::string> r;
    for (const auto& k : order_)
      if (!used_.count(k))
        r.push_back(k);
    return r;
  }

  std::string where(const std::string& key) const {
    const auto it = entries_.find(key);
    return source_ + ":" + (it == entries_.end() ? std::string("?") : std::to_string(it->second.line));
  }

private:
  std::string source_;
  std::vector<std::string> order_;
  std::map<std::string, KeyValue> entries_;
  mutable std::set<std::string> used_;
};

// Weights ---------------------------------------------------------------------

inline std::string_view to_string(PotentialVariant v) { return v == PotentialVariant::full ? "full" : "reduced"; }

inline PotentialVariant parse_potential_variant(std::string_view s) {
  if (s == "reduced")
    return PotentialVariant::reduced;
  if (s == "full")
    return PotentialVariant::full;
  throw ConfigError("unknown potential variant '" + std::string(s) + "'");
}

inline void write_weights(std::ostream& out, const ViscoSolid<double>& model) {
  const PotentialVariant pv = model.branches.empty() ? PotentialVariant::reduced : model.branches[0].potential.variant;
  out << "branches = " << model.branches.size() << '\n';
  out << "equilibrium = " << (model.equilibrium ? "true" : "false") << '\n';
  out << "potential = " << to_string(pv) << '\n';
  for (std::size_t b = 0; b < model.branches.size(); ++b)
    if (model.branches[b].potential.variant != pv)
      out << "neq" << b + 1 << ".potential = " << to_string(model.branches[b].potential.variant) << '\n';
  const auto info   = parameter_info(model);
  const auto params = flatten(model);
  for (std::size_t k = 0; k < params.size(); ++k)
    out << info[k].name << " = " << format_double(params[k]) << '\n';
}

inline void write_weights(const fs::path& p, const ViscoSolid<double>& model) {
  std::ofstream out(p);
  if (!out)
    throw IoError("cannot write " + p.string());
  write_weights(out, model);
  if (!out)
    throw IoError("write failed: " + p.string());
}

/// Topology named in a weight or run-config file.
struct Topology
{
  std::size_t branches      = 1;
  bool equilibrium          = false;
  PotentialVariant potential = PotentialVariant::reduced;
  /// Per-branch variants (`neqK.potential`); empty means all use `potential`.
  std::vector<PotentialVariant> branch_potentials;

  ViscoSolid<double> make() const {
    auto m = ViscoSolid<double>::generalized(branches, equilibrium, potential);
    for (std::size_t b = 0; b < branch_potentials.size() && b < m.branches.size(); ++b)
      m.branches[b].potential = PotentialWeights<double>(branch_potentials[b]);
    return m;
  }
};

inline Topology read_topology(const KeyValueFile& f) {
  Topology t;
  const long b = f.integer_or("branches", 1);
  if (b < 0)
    throw ConfigError(f.where("branches") + ": branch count must be non-negative");
  t.branches    = static_cast<std::size_t>(b);
  t.equilibrium = f.boolean_or("equilibrium", false);
  t.potential   = parse_potential_variant(f.get_or("potential", "reduced"));
  for (std::size_t b = 0; b < t.branches; ++b) {
    const std::string key = "neq" + std::to_string(b + 1) + ".potential";
    t.branch_potentials.push_back(f.has(key) ? parse_potential_variant(f.get(key)) : t.potential);
  }
  if (t.branches == 0 && !t.equilibrium)
    throw ConfigError(f.source() + ": model has neither branches nor an equilibrium spring");
  return t;
}

/// Reads a weight file; every weight of the declared topology must be present
/// and no unknown key may appear.
inline ViscoSolid<double> read_weights(const KeyValueFile& f) {
  const ViscoSolid<double> topo = read_topology(f).make();
  const auto info               = parameter_info(topo);
  std::vector<double> params(info.size(), 0.0);
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < info.size(); ++k) {
    if (!f.has(info[k].name)) {
      missing.push_back(info[k].name);
      continue;
    }
    params[k] = f.number(info[k].name);
    if (!std::isfinite(params[k]))
      throw IoError(f.where(info[k].name) + ": non-finite weight");
  }
  if (!missing.empty()) {
    std::string msg = f.source() + ": missing weights:";
    for (const auto& m : missing)
      msg += " " + m;
    throw ConfigError(msg);
  }
  if (const auto extra = f.unused(); !extra.empty()) {
    std::string msg = f.source() + ": unknown keys:";
    for (const auto& m : extra)
      msg += " " + m;
    throw ConfigError(msg);
  }
  return with_parameters<double>(topo, std::span<const double>(params));
}

inline ViscoSolid<double> read_weights(const fs::path& p) { return read_weights(KeyValueFile::load(p)); }

// Datasets --------------------------------------------------------------------

inline fs::path meta_path(const fs::path& csv) { return fs::path(csv.string() + ".meta"); }

/// `t,C11,S11` rows plus a `<file>.meta` sidecar with protocol, C11_max, rate.
inline void write_dataset(const fs::path& csv, const Dataset& d) {
  {
    std::ofstream out(csv);
    if (!out)
      throw IoError("cannot write " + csv.string());
    out << "t,C11,S11\n";
    for (std::size_t k = 0; k < d.path.size(); ++k)
      out << format_double(d.path.time[k]) << ',' << format_double(d.path.c11[k]) << ','
          << format_double(d.stress[k]) << '\n';
    if (!out)
      throw IoError("write failed: " + csv.string());
  }
  std::ofstream meta(meta_path(csv));
  if (!meta)
    throw IoError("cannot write " + meta_path(csv).string());
  meta << "name = " << d.name << '\n';
  meta << "protocol = " << to_string(d.path.protocol) << '\n';
  if (std::isfinite(d.c11_max))
    meta << "C11_max = " << format_double(d.c11_max) << '\n';
  if (std::isfinite(d.rate))
    meta << "rate = " << format_double(d.rate) << '\n';
}

/**
 * \brief Reads a dataset CSV and its sidecar.
 *
 * Rejects non-finite values, C11 <= 0 and non-increasing time with the
 * offending row number (header is row 1). Without a sidecar the protocol
 * defaults to uniaxial and the name to the file stem.
 */
inline Dataset read_dataset(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in)
    throw IoError("cannot open " + csv.string());
  Dataset d;
  d.name = csv.stem().string();
  const fs::path mp = meta_path(csv);
  if (fs::exists(mp)) {
    const auto meta = KeyValueFile::load(mp);
    d.name          = meta.get_or("name", d.name);
    try {
      d.path.protocol = parse_protocol(meta.get_or("protocol", "uniaxial"));
    } catch (const ConfigError& e) {
      throw IoError(meta.where("protocol") + ": " + e.what());
    }
    d.c11_max = meta.number_or("C11_max", d.c11_max);
    d.rate    = meta.number_or("rate", d.rate);
  }
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view s = trim(line);
    if (s.empty())
      continue;
    if (row == 1) {
      if (s != "t,C11,S11")
        throw IoError(csv.string() + ": row 1: expected header 't,C11,S11'");
      continue;
    }
    const std::string where = csv.string() + ": row " + std::to_string(row);
    const auto c1           = s.find(',');
    const auto c2           = c1 == std::string_view::npos ? c1 : s.find(',', c1 + 1);
    if (c2 == std::string_view::npos || s.find(',', c2 + 1) != std::string_view::npos)
      throw IoError(where + ": expected three columns");
    const double t   = parse_double(s.substr(0, c1), where);
    const double c11 = parse_double(s.substr(c1 + 1, c2 - c1 - 1), where);
    const double s11 = parse_double(s.substr(c2 + 1), where);
    if (!std::isfinite(t) || !std::isfinite(c11) || !std::isfinite(s11))
      throw IoError(where + ": non-finite value");
    if (!(c11 > 0.0))
      throw IoError(where + ": C11 must be positive");
    if (!d.path.time.empty() && !(t > d.path.time.back()))
      throw IoError(where + ": time is not strictly increasing");
    if (d.path.time.empty() && t < 0.0)
      throw IoError(where + ": negative time");
    d.path.time.push_back(t);
    d.path.c11.push_back(c11);
    d.stress.push_back(s11);
  }
  if (row == 0)
    throw IoError(csv.string() + ": empty file");
  if (d.path.size() < 2)
    throw IoError(csv.string() + ": needs at least two data rows");
  return d;
}

// Results ---------------------------------------------------------------------

inline void write_loss_history(const fs::path& p, std::span<const double> history) {
  std::ofstream out(p);
  if (!out)
    throw IoError("cannot write " + p.string());
  out << "epoch,loss\n";
  for (std::size_t k = 0; k < history.size(); ++k)
    out << k << ',' << format_double(history[k]) << '\n';
}

struct MetricsRow
{
  std::string dataset;
  std::string role; ///< train or test
  const Dataset* data = nullptr;
  DatasetReport report;
};

inline void write_metrics(const fs::path& p, std::span<const MetricsRow> rows) {
  std::ofstream out(p);
  if (!out)
    throw IoError("cannot write " + p.string());
  out << "dataset,role,protocol,C11_max,rate,epsilon,R2\n";
  auto num = [](double x) { return std::isfinite(x) ? format_double(x) : std::string(); };
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.role << ',' << to_string(r.data->path.protocol) << ',' << num(r.data->c11_max) << ','
        << num(r.data->rate) << ',';
    if (r.report.failed)
      out << "failed,failed\n";
    else
      out << num(r.report.metrics.epsilon) << ',' << num(r.report.metrics.r2) << '\n';
  }
}

inline void write_prediction(const fs::path& p, const Dataset& d, std::span<const double> predicted) {
  std::ofstream out(p);
  if (!out)
    throw IoError("cannot write " + p.string());
  out << "t,C11,S11_observed,S11_predicted\n";
  for (std::size_t k = 0; k < d.path.size(); ++k)
    out << format_double(d.path.time[k]) << ',' << format_double(d.path.c11[k]) << ',' << format_double(d.stress[k])
        << ',' << (k < predicted.size() ? format_double(predicted[k]) : std::string()) << '\n';
}

// Run configuration -----------------------------------------------------------

/**
 * \brief Settings of one `generate`, `train` or `eval` run.
 *
 * Relative paths are resolved against the directory of the config file.
 */
struct RunConfig
{
  Topology topology;
  TrainConfig train;
  std::vector<fs::path> train_data;
  std::vector<fs::path> test_data;
  fs::path output = "out";
  std::optional<fs::path> initial_weights;
  ReferenceModel reference;
  ArtificialProtocol artificial;
  fs::path data_dir = "data";
};

namespace detail {

inline std::vector<fs::path> path_list(const std::string& s, const fs::path& base) {
  std::vector<fs::path> r;
  std::string_view rest = s;
  while (!rest.empty()) {
    const auto c         = rest.find(',');
    const std::string_view item = trim(rest.substr(0, c));
    if (!item.empty())
      r.push_back(base / fs::path(std::string(item)));
    if (c == std::string_view::npos)
      break;
    rest.remove_prefix(c + 1);
  }
  return r;
}

} // namespace detail

inline RunConfig parse_run_config(const KeyValueFile& f, const fs::path& base) {
  RunConfig c;
  c.topology = read_topology(f);

  auto& t          = c.train;
  t.epochs         = static_cast<int>(f.integer_or("epochs", t.epochs));
  t.learning_rate  = f.number_or("learning_rate", t.learning_rate);
  t.beta1          = f.number_or("beta1", t.beta1);
  t.beta2          = f.number_or("beta2", t.beta2);
  t.adam_epsilon   = f.number_or("adam_epsilon", t.adam_epsilon);
  t.l2             = f.number_or("l2", t.l2);
  t.seed           = static_cast<std::uint64_t>(f.integer_or("seed", 0));
  t.penalty_factor = f.number_or("penalty_factor", t.penalty_factor);
  t.fd_step        = f.number_or("fd_step", t.fd_step);
  t.scale_init_max = f.number_or("init_scale_max", t.scale_init_max);
  t.shape_init_max = f.number_or("init_shape_max", t.shape_init_max);
  const std::string scope = f.get_or("l2_scope", "all");
  if (scope == "all")
    t.l2_scope = L2Scope::all;
  else if (scope == "scale_only")
    t.l2_scope = L2Scope::scale_only;
  else
    throw ConfigError(f.where("l2_scope") + ": expected 'all' or 'scale_only'");
  const std::string grad = f.get_or("gradient", "reverse");
  if (grad == "reverse")
    t.gradient = GradientMode::reverse;
  else if (grad == "finite_difference")
    t.gradient = GradientMode::finite_difference;
  else
    throw ConfigError(f.where("gradient") + ": expected 'reverse' or 'finite_difference'");
  t.validate();

  c.train_data = detail::path_list(f.get_or("train", ""), base);
  c.test_data  = detail::path_list(f.get_or("test", ""), base);
  for (const auto& a : c.train_data)
    for (const auto& b : c.test_data)
      if (fs::weakly_canonical(a) == fs::weakly_canonical(b))
        throw ConfigError(f.source() + ": " + a.string() + " is both a training and a test set");
  c.output   = base / fs::path(f.get_or("output", "out"));
  c.data_dir = base / fs::path(f.get_or("data_dir", "data"));
  if (f.has("initial_weights"))
    c.initial_weights = base / fs::path(f.get("initial_weights"));

  c.reference.mu                 = f.number_or("reference.mu", c.reference.mu);
  c.reference.K                  = f.number_or("reference.K", c.reference.K);
  c.reference.tau                = f.number_or("reference.tau", c.reference.tau);
  c.reference.volumetric_divisor = f.number_or("reference.volumetric_divisor", c.reference.volumetric_divisor);
  c.artificial.dt                = f.number_or("generate.dt", c.artificial.dt);
  c.artificial.ramp_s            = f.number_or("generate.ramp", c.artificial.ramp_s);
  c.artificial.hold_s            = f.number_or("generate.hold", c.artificial.hold_s);

  if (const auto extra = f.unused(); !extra.empty()) {
    std::string msg = f.source() + ": unknown keys:";
    for (const auto& m : extra)
      msg += " " + m;
    throw ConfigError(msg);
  }
  return c;
}

inline RunConfig load_run_config(const fs::path& p) {
  const auto f = KeyValueFile::load(p);
  return parse_run_config(f, p.parent_path());
}

} // namespace icann::io
