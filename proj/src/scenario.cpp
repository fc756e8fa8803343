#include "gpata/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gpata/rng.hpp"

namespace gpata {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
                const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : table) {
    if (!allowed.empty()) allowed += "|";
    allowed += name;
  }
  throw ConfigError(std::string(what) + ": unknown value '" + std::string(s) + "' (expected " +
                    allowed + ")");
}

template <class Enum, std::size_t N>
std::string_view enum_name(Enum e, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::pair<std::string_view, EstimationMode> kEstimation[] = {
    {"conservative", EstimationMode::kConservative}, {"anchor", EstimationMode::kAnchor}};
constexpr std::pair<std::string_view, PrivacyPreset> kPresets[] = {
    {"custom", PrivacyPreset::kCustom},
    {"high", PrivacyPreset::kHigh},
    {"medium", PrivacyPreset::kMedium},
    {"low", PrivacyPreset::kLow}};
constexpr std::pair<std::string_view, Scheme> kSchemes[] = {
    {"gpata", Scheme::kGpata}, {"bgta", Scheme::kBgta}, {"cog", Scheme::kCog},
    {"gmxr", Scheme::kGmxr},   {"tda", Scheme::kTda},   {"random", Scheme::kRandom}};
constexpr std::pair<std::string_view, dra::LossPairing> kPairings[] = {
    {"literal", dra::LossPairing::kLiteral}, {"swapped", dra::LossPairing::kSwapped}};

}  // namespace

std::string_view to_string(EstimationMode m) { return enum_name(m, kEstimation); }
std::string_view to_string(PrivacyPreset p) { return enum_name(p, kPresets); }
std::string_view to_string(Scheme s) { return enum_name(s, kSchemes); }
std::string_view to_string(dra::LossPairing p) { return enum_name(p, kPairings); }
EstimationMode parse_estimation(std::string_view s) {
  return parse_enum(s, kEstimation, "estimation");
}
PrivacyPreset parse_privacy_preset(std::string_view s) {
  return parse_enum(s, kPresets, "privacy");
}
Scheme parse_scheme(std::string_view s) { return parse_enum(s, kSchemes, "scheme"); }
dra::LossPairing parse_loss_pairing(std::string_view s) {
  return parse_enum(s, kPairings, "loss_pairing");
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> kAll = {Scheme::kGpata, Scheme::kBgta, Scheme::kCog,
                                           Scheme::kGmxr,  Scheme::kTda,  Scheme::kRandom};
  return kAll;
}

namespace {

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key + ": " + message);
}

void check_range(const Range& r, const std::string& key, bool non_negative = true) {
  require(r.lo <= r.hi, key, "range needs lo <= hi");
  if (non_negative) require(r.lo >= 0.0, key, "range must be non-negative");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.deadline > 0.0, "deadline", "Δ must be > 0");
  require(c.cycles >= 1, "cycles", "T must be >= 1");
  require(c.mu > 0.0 && c.mu <= 1.0, "mu", "μ must lie in (0,1]");
  require(c.rho > 0.0 && c.rho <= 1.0, "rho", "ρ must lie in (0,1]");
  require(c.negotiation_bound >= 1, "P", "P must be >= 1");
  require(c.beta > 0.0, "beta", "β must be > 0");
  require(c.eta >= 0.0, "eta", "η must be >= 0");
  require(c.lambda1 >= 0.0, "lambda1", "λ1 must be >= 0");
  require(c.lambda2 >= 0.0, "lambda2", "λ2 must be >= 0");
  require(c.initial_budget >= 0.0, "initial_budget", "budget must be >= 0");
  require(!c.thres_high || *c.thres_high >= 0, "thres_high", "must be >= 0");
  require(c.shed_fraction >= 0.0 && c.shed_fraction < 1.0, "shed_fraction",
          "must lie in [0,1)");
  require(!c.claim_round_cap || *c.claim_round_cap >= 1, "claim_round_cap", "must be >= 1");
  require(c.anchor_samples >= 1, "K", "K must be >= 1");
  require(c.freq_max > 0.0, "freq_max", "must be > 0");
  require(c.tda_exhaustive_bound >= 0, "tda_exhaustive_bound", "must be >= 0");
  require(c.bgta_iteration_cap >= 1, "bgta_iteration_cap", "must be >= 1");
  require(c.usage_jitter >= 0.0, "usage_jitter", "must be >= 0");
  require(c.network.bandwidth > 0.0, "network.bandwidth", "must be > 0");
  require(c.network.latency_per_distance >= 0.0, "network.latency_per_distance", "must be >= 0");
  require(c.network.overhead >= 0.0, "network.overhead", "must be >= 0");
  require(c.tasks.per_cycle >= 0, "tasks.per_cycle", "must be >= 0");
  check_range(c.tasks.comp_complexity, "tasks.comp_complexity");
  check_range(c.tasks.input_volume, "tasks.input_volume");
  check_range(c.tasks.output_volume, "tasks.output_volume");
  require(c.tasks.bytes_per_trans_unit > 0.0, "tasks.bytes_per_trans_unit", "must be > 0");
  check_range(c.device_generator.cpu_freq, "device_generator.cpu_freq");
  require(c.device_generator.cpu_freq.lo > 0.0, "device_generator.cpu_freq", "must be > 0");
  require(c.device_generator.cpu_freq.hi <= c.freq_max, "device_generator.cpu_freq",
          "must not exceed freq_max");
  check_range(c.device_generator.cpu_usage, "device_generator.cpu_usage");
  require(c.device_generator.cpu_usage.hi <= 1.0, "device_generator.cpu_usage",
          "must lie in [0,1]");
  check_range(c.device_generator.power_comp, "device_generator.power_comp");
  check_range(c.device_generator.power_trans_per_byte, "device_generator.power_trans_per_byte");

  require(!c.servers.empty(), "servers", "at least one edge server required");
  for (std::size_t s = 1; s < c.servers.size(); ++s) {
    require(c.servers[s - 1].id < c.servers[s].id, "servers", "ids must be unique and ascending");
  }
  require(c.hierarchy.poi_count() > 0, "hierarchy", "at least one point of interest required");
  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    const auto& spec = c.devices[d];
    const std::string key = "devices[" + std::to_string(d) + "]";
    if (d > 0) {
      require(c.devices[d - 1].state.id < spec.state.id, key, "ids must be unique and ascending");
    }
    try {
      validate(spec.state);
      privacy::validate(spec.privacy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
    require(spec.state.cpu_freq <= c.freq_max, key + ".cpu_freq", "exceeds freq_max");
    require(c.hierarchy.locate(spec.state.location).has_value(), key + ".location",
            "must be a point of interest of the hierarchy");
  }
}

// --- JSON -------------------------------------------------------------------

namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(child(key) + ": wrong type");
    }
  }

  template <class T>
  void read_optional(const std::string& key, std::optional<T>& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(child(key) + ": wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(child(key) + ": unknown key");
    }
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string label() const { return path_.empty() ? "<root>" : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Point point_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(key + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(Point p) { return json::array({p.x, p.y}); }

Range range_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(key + ": expected [lo, hi]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json range_to(Range r) { return json::array({r.lo, r.hi}); }

void read_range(ObjectReader& r, const std::string& key, Range& out) {
  if (r.has(key)) out = range_from(r.raw(key), r.child(key));
}

privacy::LocationHierarchy hierarchy_from(const json& j, const std::string& path) {
  ObjectReader root(j, path);
  std::vector<privacy::City> cities;
  const auto& cities_json = root.raw("cities");
  if (!cities_json.is_array()) throw ConfigError(path + ".cities: expected an array");
  for (std::size_t c = 0; c < cities_json.size(); ++c) {
    const std::string cpath = path + ".cities[" + std::to_string(c) + "]";
    ObjectReader cr(cities_json[c], cpath);
    privacy::City city;
    cr.read("name", city.name);
    const auto& streets = cr.raw("streets");
    if (!streets.is_array()) throw ConfigError(cpath + ".streets: expected an array");
    for (std::size_t s = 0; s < streets.size(); ++s) {
      const std::string spath = cpath + ".streets[" + std::to_string(s) + "]";
      ObjectReader sr(streets[s], spath);
      privacy::Street street;
      sr.read("name", street.name);
      const auto& pois = sr.raw("pois");
      if (!pois.is_array()) throw ConfigError(spath + ".pois: expected an array");
      for (std::size_t p = 0; p < pois.size(); ++p) {
        const std::string ppath = spath + ".pois[" + std::to_string(p) + "]";
        privacy::PointOfInterest poi;
        if (pois[p].is_array()) {
          poi.location = point_from(pois[p], ppath);
        } else {
          ObjectReader pr(pois[p], ppath);
          poi.location = point_from(pr.raw("location"), ppath + ".location");
          pr.read("weight", poi.weight);
          pr.finish();
        }
        street.pois.push_back(poi);
      }
      sr.finish();
      city.streets.push_back(std::move(street));
    }
    cr.finish();
    cities.push_back(std::move(city));
  }
  root.finish();
  try {
    return privacy::LocationHierarchy(std::move(cities));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json hierarchy_to(const privacy::LocationHierarchy& h) {
  json cities = json::array();
  for (const auto& city : h.cities()) {
    json streets = json::array();
    for (const auto& street : city.streets) {
      json pois = json::array();
      for (const auto& poi : street.pois) {
        if (poi.weight == 1.0) {
          pois.push_back(point_to(poi.location));
        } else {
          pois.push_back({{"location", point_to(poi.location)}, {"weight", poi.weight}});
        }
      }
      streets.push_back({{"name", street.name}, {"pois", pois}});
    }
    cities.push_back({{"name", city.name}, {"streets", streets}});
  }
  return {{"cities", cities}};
}

privacy::PrivacyProfile profile_from(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  privacy::PrivacyProfile p;
  r.read("location", p.location);
  r.read("freq", p.freq);
  r.read("usage", p.usage);
  r.finish();
  return p;
}

}  // namespace

nlohmann::json to_json(const ScenarioConfig& c) {
  json devices = json::array();
  for (const auto& d : c.devices) {
    devices.push_back({{"id", d.state.id},
                       {"cpu_freq", d.state.cpu_freq},
                       {"cpu_usage", d.state.cpu_usage},
                       {"location", point_to(d.state.location)},
                       {"power_comp", d.state.power_comp},
                       {"power_trans_per_byte", d.state.power_trans_per_byte},
                       {"utilization", d.state.utilization},
                       {"privacy",
                        {{"location", d.privacy.location},
                         {"freq", d.privacy.freq},
                         {"usage", d.privacy.usage}}}});
  }
  json servers = json::array();
  for (const auto& s : c.servers) {
    servers.push_back({{"id", s.id}, {"location", point_to(s.location)}});
  }
  json out = {
      {"devices", devices},
      {"servers", servers},
      {"hierarchy", hierarchy_to(c.hierarchy)},
      {"privacy", std::string(to_string(c.privacy_preset))},
      {"tasks",
       {{"per_cycle", c.tasks.per_cycle},
        {"comp_complexity", range_to(c.tasks.comp_complexity)},
        {"input_volume", range_to(c.tasks.input_volume)},
        {"output_volume", range_to(c.tasks.output_volume)},
        {"bytes_per_trans_unit", c.tasks.bytes_per_trans_unit}}},
      {"device_generator",
       {{"cpu_freq", range_to(c.device_generator.cpu_freq)},
        {"cpu_usage", range_to(c.device_generator.cpu_usage)},
        {"power_comp", range_to(c.device_generator.power_comp)},
        {"power_trans_per_byte", range_to(c.device_generator.power_trans_per_byte)}}},
      {"usage_jitter", c.usage_jitter},
      {"deadline", c.deadline},
      {"cycles", c.cycles},
      {"seed", c.seed},
      {"lambda1", c.lambda1},
      {"lambda2", c.lambda2},
      {"mu", c.mu},
      {"rho", c.rho},
      {"P", c.negotiation_bound},
      {"eta", c.eta},
      {"beta", c.beta},
      {"thres_high", c.thres_high ? json(*c.thres_high) : json(nullptr)},
      {"initial_budget", c.initial_budget},
      {"shed_fraction", c.shed_fraction},
      {"loss_pairing", std::string(to_string(c.loss_pairing))},
      {"claim_round_cap", c.claim_round_cap ? json(*c.claim_round_cap) : json(nullptr)},
      {"network",
       {{"latency_per_distance", c.network.latency_per_distance},
        {"bandwidth", c.network.bandwidth},
        {"overhead", c.network.overhead}}},
      {"K", c.anchor_samples},
      {"estimation", std::string(to_string(c.estimation))},
      {"freq_max", c.freq_max},
      {"tda_exhaustive_bound", c.tda_exhaustive_bound},
      {"bgta_iteration_cap", c.bgta_iteration_cap},
  };
  return out;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  ObjectReader r(j, "");

  if (!r.has("hierarchy")) throw ConfigError("hierarchy: required key missing");
  c.hierarchy = hierarchy_from(r.raw("hierarchy"), "hierarchy");

  if (!r.has("servers")) throw ConfigError("servers: required key missing");
  const auto& servers = r.raw("servers");
  if (!servers.is_array()) throw ConfigError("servers: expected an array");
  for (std::size_t s = 0; s < servers.size(); ++s) {
    const std::string path = "servers[" + std::to_string(s) + "]";
    ObjectReader sr(servers[s], path);
    EdgeServer server;
    sr.read("id", server.id);
    if (!sr.has("location")) throw ConfigError(path + ".location: required key missing");
    server.location = point_from(sr.raw("location"), path + ".location");
    sr.finish();
    c.servers.push_back(server);
  }

  if (r.has("tasks")) {
    ObjectReader tr(r.raw("tasks"), "tasks");
    tr.read("per_cycle", c.tasks.per_cycle);
    read_range(tr, "comp_complexity", c.tasks.comp_complexity);
    read_range(tr, "input_volume", c.tasks.input_volume);
    read_range(tr, "output_volume", c.tasks.output_volume);
    tr.read("bytes_per_trans_unit", c.tasks.bytes_per_trans_unit);
    tr.finish();
  }
  if (r.has("device_generator")) {
    ObjectReader gr(r.raw("device_generator"), "device_generator");
    read_range(gr, "cpu_freq", c.device_generator.cpu_freq);
    read_range(gr, "cpu_usage", c.device_generator.cpu_usage);
    read_range(gr, "power_comp", c.device_generator.power_comp);
    read_range(gr, "power_trans_per_byte", c.device_generator.power_trans_per_byte);
    gr.finish();
  }
  if (r.has("network")) {
    ObjectReader nr(r.raw("network"), "network");
    nr.read("latency_per_distance", c.network.latency_per_distance);
    nr.read("bandwidth", c.network.bandwidth);
    nr.read("overhead", c.network.overhead);
    nr.finish();
  }

  r.read("usage_jitter", c.usage_jitter);
  r.read("deadline", c.deadline);
  r.read("cycles", c.cycles);
  r.read("seed", c.seed);
  r.read("lambda1", c.lambda1);
  r.read("lambda2", c.lambda2);
  r.read("mu", c.mu);
  r.read("rho", c.rho);
  r.read("P", c.negotiation_bound);
  r.read("eta", c.eta);
  r.read("beta", c.beta);
  r.read_optional("thres_high", c.thres_high);
  r.read("initial_budget", c.initial_budget);
  r.read("shed_fraction", c.shed_fraction);
  r.read_optional("claim_round_cap", c.claim_round_cap);
  r.read("K", c.anchor_samples);
  r.read("freq_max", c.freq_max);
  r.read("tda_exhaustive_bound", c.tda_exhaustive_bound);
  r.read("bgta_iteration_cap", c.bgta_iteration_cap);
  std::string text;
  if (r.has("estimation")) {
    r.read("estimation", text);
    c.estimation = parse_estimation(text);
  }
  if (r.has("loss_pairing")) {
    r.read("loss_pairing", text);
    c.loss_pairing = parse_loss_pairing(text);
  }
  if (r.has("privacy")) {
    r.read("privacy", text);
    c.privacy_preset = parse_privacy_preset(text);
  }

  if (r.has("devices")) {
    const auto& devices = r.raw("devices");
    if (!devices.is_array()) throw ConfigError("devices: expected an array");
    for (std::size_t d = 0; d < devices.size(); ++d) {
      const std::string path = "devices[" + std::to_string(d) + "]";
      ObjectReader dr(devices[d], path);
      DeviceSpec spec;
      dr.read("id", spec.state.id);
      dr.read("cpu_freq", spec.state.cpu_freq);
      dr.read("cpu_usage", spec.state.cpu_usage);
      if (!dr.has("location")) throw ConfigError(path + ".location: required key missing");
      spec.state.location = point_from(dr.raw("location"), path + ".location");
      dr.read("power_comp", spec.state.power_comp);
      dr.read("power_trans_per_byte", spec.state.power_trans_per_byte);
      dr.read("utilization", spec.state.utilization);
      if (dr.has("privacy")) spec.privacy = profile_from(dr.raw("privacy"), path + ".privacy");
      dr.finish();
      c.devices.push_back(spec);
    }
    if (r.has("device_count")) throw ConfigError("device_count: conflicts with devices");
  } else if (r.has("device_count")) {
    int count = 0;
    std::uint64_t layout_seed = c.seed;
    r.read("device_count", count);
    r.read("layout_seed", layout_seed);
    if (count < 0) throw ConfigError("device_count: must be >= 0");
    validate(c);  // the generator ranges must be sane before drawing
    regenerate_devices(c, count, layout_seed);
  }
  r.finish();

  apply_privacy_preset(c, c.privacy_preset);
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot write scenario file");
  out << to_json(config).dump(2) << '\n';
}

void apply_privacy_preset(ScenarioConfig& c, PrivacyPreset preset) {
  c.privacy_preset = preset;
  int level = -1;
  if (preset == PrivacyPreset::kHigh) level = privacy::kMaxLevel;
  if (preset == PrivacyPreset::kLow) level = 0;
  if (level < 0) return;
  for (auto& d : c.devices) d.privacy = {level, level, level};
}

void regenerate_devices(ScenarioConfig& c, int count, std::uint64_t layout_seed) {
  const auto points = c.hierarchy.all_points();
  if (points.empty()) throw ConfigError("hierarchy: no points of interest to place devices on");
  const auto& g = c.device_generator;
  c.devices.clear();
  c.devices.reserve(static_cast<std::size_t>(count));
  for (int id = 0; id < count; ++id) {
    Rng rng = Rng::derive(layout_seed, "device", static_cast<std::uint64_t>(id));
    DeviceSpec spec;
    spec.state.id = id;
    spec.state.cpu_freq = rng.uniform(g.cpu_freq.lo, g.cpu_freq.hi);
    spec.state.cpu_usage = rng.uniform(g.cpu_usage.lo, g.cpu_usage.hi);
    spec.state.location = points[rng.below(points.size())];
    spec.state.power_comp = rng.uniform(g.power_comp.lo, g.power_comp.hi);
    spec.state.power_trans_per_byte =
        rng.uniform(g.power_trans_per_byte.lo, g.power_trans_per_byte.hi);
    c.devices.push_back(spec);
  }
  apply_privacy_preset(c, c.privacy_preset);
}

ScenarioConfig make_reference_scenario(std::uint64_t layout_seed) {
  ScenarioConfig c;
  constexpr int kCities = 3, kStreets = 5, kPois = 5;
  constexpr double kCitySpacing = 10.0;
  std::vector<privacy::City> cities;
  for (int ci = 0; ci < kCities; ++ci) {
    const double angle = 2.0 * std::numbers::pi * ci / kCities;
    const Point center{kCitySpacing * std::cos(angle), kCitySpacing * std::sin(angle)};
    c.servers.push_back(EdgeServer{ci, center, {}});
    privacy::City city;
    city.name = "city" + std::to_string(ci);
    for (int si = 0; si < kStreets; ++si) {
      Rng rng = Rng::derive(layout_seed, "street", static_cast<std::uint64_t>(ci),
                            static_cast<std::uint64_t>(si));
      // Each street is a short segment somewhere within 3 units of the center.
      const double r = 3.0 * std::sqrt(rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const double heading = std::numbers::pi * rng.uniform();
      const Point start{center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
      privacy::Street street;
      street.name = city.name + "-street" + std::to_string(si);
      for (int pi = 0; pi < kPois; ++pi) {
        const double step = 0.2 * pi;
        // Round to a 1e-6 grid so the layout survives any text round trip.
        auto snap = [](double v) { return std::round(v * 1e6) / 1e6; };
        street.pois.push_back(
            {{snap(start.x + step * std::cos(heading)), snap(start.y + step * std::sin(heading))},
             1.0});
      }
      city.streets.push_back(std::move(street));
    }
    cities.push_back(std::move(city));
  }
  c.hierarchy = privacy::LocationHierarchy(std::move(cities));
  c.privacy_preset = PrivacyPreset::kMedium;
  c.tasks.per_cycle = 30;
  c.cycles = 100;
  regenerate_devices(c, 15, layout_seed);
  validate(c);
  return c;
}

}  // namespace gpata
