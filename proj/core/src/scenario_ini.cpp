#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "m2m/sim.hpp"

namespace m2m {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::string& key) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigInvalid, "bad number for '" + key + "': '" + s + "'");
  }
  return v;
}

Nanos parse_int(const std::string& s, const std::string& key) {
  Nanos v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigInvalid, "bad integer for '" + key + "': '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCode::ConfigInvalid, "bad boolean for '" + key + "': '" + s + "'");
}

Nanos ms_to_ns(double ms) { return std::llround(ms * 1e6); }

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> get(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw Error(ErrorCode::ConfigInvalid, "[" + name_ + "] needs '" + key + "'");
    return *v;
  }

  double number(const std::string& key) const { return parse_double(require(key), name_ + "." + key); }

  const std::string& name() const { return name_; }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

DelayDist read_delay(const Section& s) {
  if (!s.present()) return DelayDist::constant(0);
  const auto kind = parse_delay_kind(s.require("kind"));
  switch (kind) {
    case DelayKind::Constant:
      if (auto ns = s.get("value_ns")) return DelayDist::constant(parse_int(*ns, s.name() + ".value_ns"));
      return DelayDist::constant(ms_to_ns(s.number("value_ms")));
    case DelayKind::LogNormal:
      if (s.get("mu") && s.get("sigma")) return DelayDist::lognormal(s.number("mu"), s.number("sigma"));
      return fit_delay_dist(kind, ms_to_ns(s.number("median_ms")), ms_to_ns(s.number("iqr_ms")));
    case DelayKind::Gamma:
      if (s.get("shape") && s.get("scale_ns")) return DelayDist::gamma(s.number("shape"), s.number("scale_ns"));
      return fit_delay_dist(kind, ms_to_ns(s.number("median_ms")), ms_to_ns(s.number("iqr_ms")));
    case DelayKind::Empirical: {
      std::vector<Nanos> samples;
      std::istringstream in(s.require("samples_ns"));
      std::string tok;
      while (in >> tok) samples.push_back(parse_int(tok, s.name() + ".samples_ns"));
      return DelayDist::empirical(std::move(samples));
    }
  }
  return DelayDist::constant(0);
}

ClockModel read_clock(const Section& s) {
  ClockModel m;
  if (auto v = s.get("initial_offset_ns")) m.initial_offset_ns = parse_int(*v, "initial_offset_ns");
  if (s.get("drift_ppm")) m.drift_ppm = s.number("drift_ppm");
  if (s.get("jitter_std_ns")) m.jitter_std_ns = s.number("jitter_std_ns");
  if (s.get("correction_interval_s")) m.correction_interval_s = s.number("correction_interval_s");
  if (s.get("correction_gain")) m.correction_gain = s.number("correction_gain");
  if (s.get("spike_prob")) m.spike_prob = s.number("spike_prob");
  if (auto v = s.get("spike_max_ns")) m.spike_max_ns = parse_int(*v, "spike_max_ns");
  m.validate();
  return m;
}

void write_delay(std::ostream& out, const char* name, const DelayDist& d) {
  out << '[' << name << "]\n" << "kind=" << to_string(d.kind()) << '\n';
  switch (d.kind()) {
    case DelayKind::Constant:
      out << "value_ns=" << d.constant_ns() << '\n';
      break;
    case DelayKind::LogNormal:
      out << "mu=" << fmt_double(d.mu()) << "\nsigma=" << fmt_double(d.sigma()) << '\n';
      break;
    case DelayKind::Gamma:
      out << "shape=" << fmt_double(d.shape()) << "\nscale_ns=" << fmt_double(d.scale_ns()) << '\n';
      break;
    case DelayKind::Empirical: {
      out << "samples_ns=";
      for (std::size_t i = 0; i < d.samples().size(); ++i) out << (i ? " " : "") << d.samples()[i];
      out << '\n';
      break;
    }
  }
  if (d.kind() != DelayKind::Constant) {
    out << "; median_ms=" << fmt_double(d.median_ns() / 1e6) << " iqr_ms=" << fmt_double(d.iqr_ns() / 1e6) << '\n';
  }
}

void write_clock(std::ostream& out, const char* name, const ClockModel& m) {
  out << '[' << name << "]\n"
      << "initial_offset_ns=" << m.initial_offset_ns << '\n'
      << "drift_ppm=" << fmt_double(m.drift_ppm) << '\n'
      << "jitter_std_ns=" << fmt_double(m.jitter_std_ns) << '\n'
      << "correction_interval_s=" << fmt_double(m.correction_interval_s) << '\n'
      << "correction_gain=" << fmt_double(m.correction_gain) << '\n'
      << "spike_prob=" << fmt_double(m.spike_prob) << '\n'
      << "spike_max_ns=" << m.spike_max_ns << '\n';
}

}  // namespace

ScenarioConfig scenario_from_ini(std::string_view text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.message(), e.line());
  }

  ScenarioConfig cfg;
  const auto sc = section(root, "scenario");
  if (auto v = sc.get("label")) cfg.label = *v;
  if (auto v = sc.get("stationary")) cfg.stationary = parse_bool(*v, "stationary");
  if (auto v = sc.get("sync_mode")) cfg.sync_mode = parse_sync_mode(*v);
  if (sc.get("trial_interval_s")) cfg.trial_interval_s = sc.number("trial_interval_s");
  if (auto v = sc.get("trials")) {
    const auto n = parse_int(*v, "trials");
    if (n <= 0) throw Error(ErrorCode::ConfigInvalid, "trials must be positive");
    cfg.trials = static_cast<std::size_t>(n);
  }
  if (auto v = sc.get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_int(*v, "seed"));
  if (auto v = sc.get("stratified")) cfg.stratified = parse_bool(*v, "stratified");

  cfg.l_gen = read_delay(section(root, "l_gen"));
  cfg.l_network = read_delay(section(root, "l_network"));
  cfg.l_exec = read_delay(section(root, "l_exec"));
  cfg.l_follow = read_delay(section(root, "l_follow"));
  cfg.friction_extra = read_delay(section(root, "friction_extra"));

  const auto co = section(root, "clock_operator");
  const auto cv = section(root, "clock_vehicle");
  if (co.present() || cv.present()) {
    const auto base = ClockPair::preset(cfg.sync_mode);
    cfg.clocks = ClockPair{co.present() ? read_clock(co) : base.operator_clock,
                           cv.present() ? read_clock(cv) : base.vehicle_clock};
  }
  cfg.validate();
  return cfg;
}

std::string scenario_to_ini(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "[scenario]\n"
      << "label=" << cfg.label << '\n'
      << "stationary=" << (cfg.stationary ? "true" : "false") << '\n'
      << "sync_mode=" << to_string(cfg.sync_mode) << '\n'
      << "trial_interval_s=" << fmt_double(cfg.trial_interval_s) << '\n'
      << "trials=" << cfg.trials << '\n'
      << "seed=" << cfg.seed << '\n'
      << "stratified=" << (cfg.stratified ? "true" : "false") << '\n';
  write_delay(out, "l_gen", cfg.l_gen);
  write_delay(out, "l_network", cfg.l_network);
  write_delay(out, "l_exec", cfg.l_exec);
  write_delay(out, "l_follow", cfg.l_follow);
  write_delay(out, "friction_extra", cfg.friction_extra);
  if (cfg.clocks) {
    write_clock(out, "clock_operator", cfg.clocks->operator_clock);
    write_clock(out, "clock_vehicle", cfg.clocks->vehicle_clock);
  }
  return out.str();
}

std::string config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : scenario_to_ini(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace m2m
