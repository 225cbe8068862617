// conesurf: command-line front end.
//
// Exit codes: 0 success or PASS, 2 invalid input or usage, 3 experiment FAIL.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conesurf/covering.hpp"
#include "conesurf/cylinders.hpp"
#include "conesurf/saddles.hpp"
#include "conesurf/surface.hpp"
#include "conesurf/surface_io.hpp"
#include "conesurf/svg.hpp"
#include "conesurf/tracer.hpp"

using namespace conesurf;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kFail = 3;
constexpr const char* kVersion = "conesurf 0.1";

struct Globals {
  std::string tolerance_file;
  bool quiet = false;
  bool json = false;
};

Globals g;

BuildOptions build_options() {
  BuildOptions o;
  if (g.tolerance_file.empty()) return o;
  json j;
  try {
    j = json::parse(read_text_file(g.tolerance_file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "--tolerance-overrides: " + std::string(e.what()));
  }
  for (const auto& [key, val] : j.items()) {
    if (!val.is_number() || val.get<double>() <= 0)
      throw Error(ErrorCode::ParseError, "--tolerance-overrides: '" + key + "' must be a positive number");
    const double v = val.get<double>();
    if (key == "len") o.tol.len = v;
    else if (key == "angle") o.tol.angle = v;
    else if (key == "hit") o.tol.hit = v;
    else if (key == "rec") o.tol.rec = v;
    else if (key == "dev") o.tol.dev = v;
    else throw Error(ErrorCode::ParseError, "--tolerance-overrides: unknown tolerance '" + key + "'");
  }
  return o;
}

ConeSurface surface_from(const std::string& path) { return load_surface(path, build_options()); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

void emit(const json& j, const std::string& text) {
  if (g.quiet) return;
  if (g.json) std::cout << j.dump(2) << "\n";
  else std::cout << text;
}

std::string fmt(double v, int prec = 12) {
  std::ostringstream o;
  o << std::setprecision(prec) << v;
  return o.str();
}

json vec(Vec2 v) { return json::array({v.x, v.y}); }

std::size_t resolve_chart(const ConeSurface& s, const std::string& ref) {
  for (std::size_t i = 0; i < s.charts().size(); ++i)
    if (s.chart(i).id == ref) return i;
  try {
    std::size_t used = 0;
    const std::size_t i = std::stoul(ref, &used);
    if (used == ref.size() && i < s.charts().size()) return i;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::StartOutsideSurface, "no polygon '" + ref + "'");
}

Vec2 vec_of(const std::vector<double>& v, const std::string& flag) {
  if (v.size() != 2) throw Error(ErrorCode::InvalidArgument, flag + " expects two comma-separated numbers");
  return {v[0], v[1]};
}

GeodesicState state_from_json(const ConeSurface& s, const json& j, const std::string& where) {
  try {
    const auto& c = j.at("chart");
    const std::string ref = c.is_string() ? c.get<std::string>() : std::to_string(c.get<std::size_t>());
    const auto p = j.at("point").get<std::vector<double>>();
    const auto d = j.at("direction").get<std::vector<double>>();
    return {resolve_chart(s, ref), vec_of(p, where + ".point"), vec_of(d, where + ".direction"), 0.0};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, where + ": " + e.what());
  }
}

std::vector<double> parse_lengths(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--lengths: '" + tok + "' is not a number");
    }
  }
  return out;
}

json events_json(const TraceResult& tr) {
  json ev = json::array();
  for (const auto& e : tr.events) {
    json x = {{"kind", std::string(to_string(e.kind))}, {"arclength", e.arclength}, {"chart", e.chart},
              {"point", vec(e.point)}};
    if (e.edge) x["edge"] = e.edge->edge;
    if (e.gluing) x["gluing"] = *e.gluing;
    if (e.vertex_class) x["vertex_class"] = *e.vertex_class;
    if (e.sector) x["sector"] = {{"lower", e.sector->lower}, {"width", e.sector->width}};
    ev.push_back(x);
  }
  return ev;
}

std::string events_csv(const TraceResult& tr) {
  std::ostringstream o;
  o << std::setprecision(17) << "kind,arclength,chart,x,y,edge,vertex_class\n";
  for (const auto& e : tr.events) {
    o << to_string(e.kind) << "," << e.arclength << "," << e.chart << "," << e.point.x << "," << e.point.y << ",";
    if (e.edge) o << e.edge->edge;
    o << ",";
    if (e.vertex_class) o << *e.vertex_class;
    o << "\n";
  }
  return o.str();
}

// --- subcommands ------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const ConeSurface s = surface_from(path);
  const auto gb = validate_gauss_bonnet(s);
  json j = {{"surface", path},
            {"charts", s.charts().size()},
            {"gluings", s.gluings().size()},
            {"euler_characteristic", s.euler_characteristic()},
            {"gauss_bonnet", {{"lhs", gb.lhs}, {"rhs", gb.rhs}, {"residual", gb.residual}, {"ok", gb.ok}}}};
  std::ostringstream t;
  t << "surface " << path << ": " << s.charts().size() << " polygons, " << s.gluings().size() << " gluings, chi = "
    << s.euler_characteristic() << "\n";
  j["vertex_classes"] = json::array();
  for (const auto& c : s.vertex_classes()) {
    j["vertex_classes"].push_back({{"id", c.id}, {"angle", c.angle}, {"kind", std::string(to_string(c.kind))},
                                   {"corners", c.corners.size()}});
    t << "  class " << c.id << ": angle " << fmt(c.angle) << " (" << fmt(c.angle / kPi) << " pi), "
      << to_string(c.kind) << ", " << c.corners.size() << " corners\n";
  }
  t << "Gauss-Bonnet: sum(2pi - theta) = " << fmt(gb.lhs) << ", 2pi chi = " << fmt(gb.rhs)
    << ", residual " << gb.residual << (gb.ok ? " OK" : " FAILED") << "\n";
  emit(j, t.str());
  return gb.ok ? kOk : kInvalid;
}

struct TraceArgs {
  std::string surface, chart = "0", events_csv, svg, report;
  std::vector<double> point, direction;
  double length = 10;
  bool no_stop = false, recurrence = false;
};

int cmd_trace(const TraceArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  TraceOptions o;
  o.stop_on_cone = !a.no_stop;
  o.detect_recurrence = a.recurrence;
  const GeodesicState st{resolve_chart(s, a.chart), vec_of(a.point, "--point"), vec_of(a.direction, "--direction"), 0};
  const TraceResult tr = trace(s, st, a.length, o);
  json j = {{"total_length", tr.total_length},
            {"end", {{"chart", tr.end.chart}, {"point", vec(tr.end.point)}, {"direction", vec(tr.end.direction)}}},
            {"min_distance", tr.final_min_distance()},
            {"collinearity", developed_collinearity(tr)},
            {"events", events_json(tr)}};
  if (!a.events_csv.empty()) write_file(a.events_csv, events_csv(tr));
  if (!a.svg.empty()) write_file(a.svg, developed_svg(s, tr, {800, 20, kVersion}));
  if (!a.report.empty()) write_file(a.report, j.dump(2) + "\n");
  std::ostringstream t;
  t << "traced " << fmt(tr.total_length) << " in " << tr.segments.size() << " segments, "
    << tr.events.size() << " events";
  if (const auto* e = tr.last_event()) t << ", last " << to_string(e->kind);
  t << "\nm(T) = " << fmt(tr.final_min_distance()) << "\n";
  emit(j, t.str());
  return kOk;
}

struct SaddleArgs {
  std::string surface, base, csv;
  double length = 5;
  std::size_t budget = 1'000'000;
  bool spectrum = false;
};

int cmd_saddles(const SaddleArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  SaddleSearchOptions o;
  o.budget = a.budget;
  std::vector<SaddleConnection> sc;
  if (a.base.empty()) {
    sc = enumerate_all_saddles(s, a.length, o);
  } else {
    std::size_t b = 0;
    try {
      b = std::stoul(a.base);
    } catch (const std::exception&) {
      throw Error(ErrorCode::UnknownVertexClass, "--base: '" + a.base + "' is not a class index");
    }
    sc = enumerate_saddles(s, b, a.length, o);
  }
  std::ostringstream csv;
  csv << std::setprecision(17) << "index,start,end,length,hx,hy,start_angle,end_angle\n";
  json arr = json::array();
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const auto& c = sc[i];
    csv << i << "," << c.start << "," << c.end << "," << c.length << "," << c.holonomy.x << "," << c.holonomy.y << ","
        << c.start_angle << "," << c.end_angle << "\n";
    arr.push_back({{"index", i}, {"start", c.start}, {"end", c.end}, {"length", c.length},
                   {"holonomy", vec(c.holonomy)}});
  }
  if (!a.csv.empty()) write_file(a.csv, csv.str());
  json j = {{"length_bound", a.length}, {"count", sc.size()}, {"connections", arr}};
  std::ostringstream t;
  t << sc.size() << " saddle connections of length <= " << fmt(a.length) << "\n";
  if (a.spectrum) {
    const auto sp = direction_spectrum(s, a.length, o);
    j["spectrum"] = {{"directions", sp.directions.size()}, {"max_gap", sp.max_gap}};
    t << sp.directions.size() << " directions, largest gap " << fmt(sp.max_gap) << "\n";
  }
  if (!g.json && !g.quiet && a.csv.empty()) t << csv.str();
  emit(j, t.str());
  return kOk;
}

struct CylinderArgs {
  std::string surface, chart = "0", report;
  std::vector<double> direction, point;
  long from_saddle = -1;
  double saddle_length = 5;
  double max_length = 100;
};

json width_json(const std::optional<double>& w) { return w ? json(*w) : json("unbounded"); }

int cmd_cylinders(const CylinderArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  ClosedSearchOptions o;
  o.max_length = a.max_length;
  if (!a.point.empty()) o.hint = vec_of(a.point, "--point");
  std::optional<Cylinder> cyl;
  if (a.from_saddle >= 0) {
    const auto sc = enumerate_all_saddles(s, a.saddle_length);
    if (static_cast<std::size_t>(a.from_saddle) >= sc.size())
      throw Error(ErrorCode::InvalidArgument, "--from-saddle: only " + std::to_string(sc.size()) +
                                                  " connections of length <= " + fmt(a.saddle_length));
    cyl = find_closed_geodesic(s, sc[static_cast<std::size_t>(a.from_saddle)], o);
  } else {
    if (a.direction.empty()) throw Error(ErrorCode::InvalidArgument, "one of --direction or --from-saddle is required");
    cyl = find_closed_geodesic(s, resolve_chart(s, a.chart), vec_of(a.direction, "--direction"), o);
  }
  json j;
  std::ostringstream t;
  if (!cyl) {
    j = {{"found", false}};
    t << "no closed geodesic found within length " << fmt(a.max_length) << "\n";
  } else {
    auto bjson = [](const std::vector<BoundaryPoint>& v) {
      json arr = json::array();
      for (const auto& b : v) arr.push_back({{"vertex_class", b.vertex_class}, {"t", b.t}, {"distance", b.h}});
      return arr;
    };
    j = {{"found", true},
         {"circumference", cyl->circumference},
         {"core", {{"chart", cyl->core.start.chart}, {"point", vec(cyl->core.start.point)},
                   {"direction", vec(cyl->core.start.direction)}}},
         {"sides", "left is to the left of the core direction"},
         {"d_left", width_json(cyl->width_left)},
         {"d_right", width_json(cyl->width_right)},
         {"left_boundary", bjson(cyl->left_boundary)},
         {"right_boundary", bjson(cyl->right_boundary)}};
    t << "closed geodesic of circumference " << fmt(cyl->circumference) << "\n  d_L = "
      << (cyl->width_left ? fmt(*cyl->width_left) : "unbounded") << "\n  d_R = "
      << (cyl->width_right ? fmt(*cyl->width_right) : "unbounded") << "\n";
  }
  if (!a.report.empty()) write_file(a.report, j.dump(2) + "\n");
  emit(j, t.str());
  return kOk;
}

json density_json(const DensityReport& r, const DensityOptions& o) {
  json steps = json::array();
  for (const auto& st : r.steps) {
    json x = {{"L", st.L}, {"distance", std::isfinite(st.distance) ? json(st.distance) : json(nullptr)},
              {"candidates", st.candidates}};
    if (st.best)
      x["best"] = {{"kind", st.best->kind}, {"circumference", st.best->circumference},
                   {"direction", vec(st.best->direction)}, {"links", st.best->links}};
    steps.push_back(x);
  }
  return {{"window", o.window},
          {"eta", o.eta},
          {"steps", steps},
          {"target_closed", r.target_closed},
          {"non_increasing", r.non_increasing},
          {"strictly_decreasing", r.strictly_decreasing},
          {"final", std::isfinite(r.final_value) ? json(r.final_value) : json(nullptr)},
          {"truncation_bound", r.truncation_bound},
          {"verdict", r.pass ? "PASS" : "FAIL"}};
}

std::string density_text(const DensityReport& r) {
  std::ostringstream t;
  for (const auto& st : r.steps) {
    t << "L = " << fmt(st.L) << ": distance " << fmt(st.distance);
    if (st.best) t << " (" << st.best->kind << ", length " << fmt(st.best->circumference) << ")";
    t << "\n";
  }
  t << (r.pass ? "PASS" : "FAIL") << "\n";
  return t.str();
}

struct DensityArgs {
  std::string surface, target, lengths, report;
  double window = 5, eta = 0.05;
};

int cmd_density(const DensityArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  json tj;
  try {
    tj = json::parse(read_text_file(a.target));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "--target-spec: " + std::string(e.what()));
  }
  DensityOptions o;
  o.window = a.window;
  o.eta = a.eta;
  const auto r = density_experiment(s, state_from_json(s, tj, "--target-spec"), parse_lengths(a.lengths), o);
  const json j = density_json(r, o);
  if (!a.report.empty()) write_file(a.report, j.dump(2) + "\n");
  emit(j, density_text(r));
  return r.pass ? kOk : kFail;
}

struct CoverArgs {
  std::string surface, degree = "auto", monodromy = "search", out, report;
  std::size_t node_budget = 10'000'000;
};

int cmd_cover(const CoverArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  std::size_t d = 0;
  if (a.degree == "auto") {
    d = default_odd_degree(s);
  } else {
    try {
      std::size_t used = 0;
      d = std::stoul(a.degree, &used);
      if (used != a.degree.size() || d == 0) throw std::invalid_argument(a.degree);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--degree: expected a positive integer or 'auto', got '" + a.degree + "'");
    }
  }
  CoverSpec spec;
  if (a.monodromy == "search") {
    MonodromySearchOptions mo;
    mo.node_budget = a.node_budget;
    const auto found = search_monodromy(s, d, mo);
    if (!found) throw Error(ErrorCode::InvalidPermutation, "no monodromy with the prescribed cycle types found");
    spec = *found;
  } else {
    json mj;
    try {
      mj = json::parse(read_text_file(a.monodromy));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "--monodromy: " + std::string(e.what()));
    }
    spec = cover_spec_from_json(mj, d);
  }
  const Cover c = build_cover(s, spec);
  json j = to_json(c.report);
  j["monodromy"] = to_json(spec)["permutations"];
  j["riemann_hurwitz_residual"] = riemann_hurwitz_residual(s, c);
  if (!a.out.empty()) write_file(a.out, to_json(c.description).dump(2) + "\n");
  if (!a.report.empty()) write_file(a.report, j.dump(2) + "\n");
  std::ostringstream t;
  t << "degree " << d << " cover: " << c.surface.charts().size() << " polygons, chi = "
    << c.report.euler_characteristic << (c.report.connected ? ", connected" : ", DISCONNECTED") << "\n";
  for (const auto& cc : c.report.cover_classes)
    t << "  class " << cc.cover_class << " over " << cc.base_class << ": local degree " << cc.local_degree
      << ", angle " << fmt(cc.angle / kPi) << " pi\n";
  t << "Riemann-Hurwitz residual " << riemann_hurwitz_residual(s, c) << "\n";
  emit(j, t.str());
  return kOk;
}

struct ExperimentArgs {
  std::string scenario, surface, config, report;
};

int cmd_experiment(const ExperimentArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConeSurface s = surface_from(a.surface);
  json cfg;
  try {
    cfg = json::parse(read_text_file(a.config));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "--config: " + std::string(e.what()));
  }
  auto lengths_of = [&](const char* key) {
    if (!cfg.contains(key) || !cfg[key].is_array()) throw Error(ErrorCode::ParseError, std::string("--config: '") + key + "' must be an array");
    const auto v = cfg[key].get<std::vector<double>>();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!(v[i] > 0) || (i && v[i] <= v[i - 1]))
        throw Error(ErrorCode::InvalidArgument, std::string("--config: '") + key + "' must be strictly increasing");
    return v;
  };
  auto positive = [&](const char* key, double def) {
    const double v = cfg.value(key, def);
    if (!(v > 0)) throw Error(ErrorCode::InvalidArgument, std::string("--config: '") + key + "' must be positive");
    return v;
  };
  json rep = {{"scenario", a.scenario}, {"surface", a.surface}, {"config", cfg}};
  bool pass = false;
  std::string text;
  if (a.scenario == "no-strips") {
    const auto lengths = lengths_of("lengths");
    const double thr = positive("threshold", 0.05);
    const GeodesicState st = state_from_json(s, cfg.at("start"), "--config start");
    const auto r = min_distance_experiment(s, st, lengths);
    json series = json::array();
    std::ostringstream t;
    for (const auto& [T, m] : r.series) {
      series.push_back({{"T", T}, {"m", m}});
      t << "m(" << fmt(T) << ") = " << fmt(m) << "\n";
    }
    pass = r.non_increasing && r.reached_end && r.final_value < thr;
    rep["metrics"] = {{"series", series}, {"non_increasing", r.non_increasing}, {"reached_end", r.reached_end},
                      {"final", r.final_value}, {"threshold", thr}};
    t << (pass ? "PASS" : "FAIL") << "\n";
    text = t.str();
  } else if (a.scenario == "density") {
    DensityOptions o;
    o.window = positive("window", 5.0);
    o.eta = positive("eta", 0.05);
    const auto r = density_experiment(s, state_from_json(s, cfg.at("target"), "--config target"),
                                      lengths_of("lengths"), o);
    rep["metrics"] = density_json(r, o);
    pass = r.pass;
    text = density_text(r);
  } else {
    throw Error(ErrorCode::InvalidArgument, "experiment: unknown scenario '" + a.scenario + "'");
  }
  rep["verdict"] = pass ? "PASS" : "FAIL";
  const std::string out = a.report.empty() ? cfg.value("report", a.scenario + "_report.json") : a.report;
  write_file(out, rep.dump(2) + "\n");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(rep, text + "report: " + out + "\nwall-clock: " + fmt(secs, 4) + " s\n");
  return pass ? kOk : kFail;
}

struct SelftestArgs {
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::string surface;
};

int cmd_selftest(const SelftestArgs& a) {
  const ConeSurface s = surface_from(a.surface);
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> ang(0, kTwoPi), len(1, 100);
  const auto& poly = s.chart(0);
  const Vec2 c = polygon_centroid(poly.vertices);
  double worst = 0;
  std::size_t done = 0;
  while (done < a.count) {
    std::uniform_int_distribution<std::size_t> pick(0, poly.size() - 1);
    const std::size_t i = pick(rng);
    std::uniform_real_distribution<double> f(0.05, 0.95);
    const Vec2 p = c + (poly.vertex(i) - c) * f(rng) + (poly.vertex(i + 1) - c) * (0.5 * f(rng) * 0.1);
    if (!point_in_polygon(p, poly.vertices)) continue;
    const double a0 = ang(rng);
    TraceOptions o;
    o.record_min_distance = false;
    const TraceResult tr = trace(s, {0, p, {std::cos(a0), std::sin(a0)}}, len(rng), o);
    worst = std::max(worst, developed_collinearity(tr));
    ++done;
  }
  const bool pass = worst <= s.tolerances().dev;
  json j = {{"seed", a.seed}, {"traces", a.count}, {"max_collinearity_per_length", worst},
            {"verdict", pass ? "PASS" : "FAIL"}};
  std::ostringstream t;
  t << "selftest seed " << a.seed << ": " << a.count << " traces, worst collinearity " << worst << " per unit length "
    << (pass ? "PASS" : "FAIL") << "\n";
  emit(j, t.str());
  return pass ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesics on Euclidean cone surfaces"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--tolerance-overrides", g.tolerance_file, "JSON object overriding tolerances (len, angle, hit, rec, dev)")
      ->check(CLI::ExistingFile);
  app.add_flag("--quiet", g.quiet, "Print nothing on success");
  app.add_flag("--json", g.json, "Print results as JSON");

  std::string validate_surface;
  auto* validate = app.add_subcommand("validate", "Check a surface and print its cone points");
  validate->add_option("--surface", validate_surface, "Surface JSON file")->required();

  TraceArgs ta;
  auto* tr = app.add_subcommand("trace", "Trace a geodesic");
  tr->add_option("--surface", ta.surface, "Surface JSON file")->required();
  tr->add_option("--chart", ta.chart, "Start polygon id or index")->capture_default_str();
  tr->add_option("--point", ta.point, "Start point x,y in the polygon")->delimiter(',')->expected(2)->required();
  tr->add_option("--direction", ta.direction, "Direction dx,dy")->delimiter(',')->expected(2)->required();
  tr->add_option("--length", ta.length, "Maximum arclength")->capture_default_str();
  tr->add_flag("--no-stop", ta.no_stop, "Continue through cone points of angle >= 2pi");
  tr->add_flag("--recurrence", ta.recurrence, "Stop when the trajectory closes up");
  tr->add_option("--events-csv", ta.events_csv, "Write events as CSV");
  tr->add_option("--svg", ta.svg, "Write the developed trajectory as SVG");
  tr->add_option("--report", ta.report, "Write a JSON report");

  SaddleArgs sa;
  auto* sad = app.add_subcommand("saddles", "Enumerate saddle connections");
  sad->add_option("--surface", sa.surface, "Surface JSON file")->required();
  sad->add_option("--length", sa.length, "Length bound L")->capture_default_str();
  sad->add_option("--base", sa.base, "Start vertex class (default: all singular classes)");
  sad->add_option("--budget", sa.budget, "Maximum number of unfolded polygon copies")->capture_default_str();
  sad->add_flag("--spectrum", sa.spectrum, "Report the direction spectrum and its largest gap");
  sad->add_option("--csv", sa.csv, "Write connections as CSV");

  CylinderArgs ca;
  auto* cyl = app.add_subcommand("cylinders", "Find a closed geodesic and its strip widths");
  cyl->add_option("--surface", ca.surface, "Surface JSON file")->required();
  auto* dir_opt = cyl->add_option("--direction", ca.direction, "Direction dx,dy")->delimiter(',')->expected(2);
  cyl->add_option("--chart", ca.chart, "Polygon the direction refers to")->capture_default_str();
  cyl->add_option("--point", ca.point, "Preferred start point x,y")->delimiter(',')->expected(2);
  auto* from_opt = cyl->add_option("--from-saddle", ca.from_saddle, "Use the direction of saddle connection IDX");
  cyl->add_option("--saddle-length", ca.saddle_length, "Length bound for the --from-saddle list")->capture_default_str();
  cyl->add_option("--max-length", ca.max_length, "Search budget as trace length")->capture_default_str();
  cyl->add_option("--report", ca.report, "Write a JSON report");
  dir_opt->excludes(from_opt);

  DensityArgs da;
  auto* den = app.add_subcommand("density", "Approximate a geodesic by closed ones");
  den->add_option("--surface", da.surface, "Surface JSON file")->required();
  den->add_option("--target-spec", da.target, "JSON {chart, point, direction} of the target")->required();
  den->add_option("--lengths", da.lengths, "Increasing length bounds, comma separated")->required();
  den->add_option("--window", da.window, "Half-width W of the comparison window")->capture_default_str();
  den->add_option("--eta", da.eta, "Threshold for the final distance")->capture_default_str();
  den->add_option("--report", da.report, "Write a JSON report");

  CoverArgs co;
  auto* cov = app.add_subcommand("cover", "Build a branched cover");
  cov->add_option("--surface", co.surface, "Surface JSON file")->required();
  cov->add_option("--degree", co.degree, "Degree d, or 'auto' for the smallest odd admissible d")->capture_default_str();
  cov->add_option("--monodromy", co.monodromy, "Permutation JSON file, or 'search'")->capture_default_str();
  cov->add_option("--node-budget", co.node_budget, "Node budget of the monodromy search")->capture_default_str();
  cov->add_option("--out", co.out, "Write the cover surface JSON");
  cov->add_option("--report", co.report, "Write the branching report JSON");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run a configured experiment");
  exp->add_option("scenario", ea.scenario, "no-strips or density")->required()->check(CLI::IsMember({"no-strips", "density"}));
  exp->add_option("--surface", ea.surface, "Surface JSON file")->required();
  exp->add_option("--config", ea.config, "Experiment JSON file")->required();
  exp->add_option("--report", ea.report, "Report path (default from config, else <scenario>_report.json)");

  SelftestArgs st;
  auto* self = app.add_subcommand("selftest", "Random developing-map checks");
  self->add_option("--surface", st.surface, "Surface JSON file")->required();
  self->add_option("--seed", st.seed, "Random seed")->capture_default_str();
  self->add_option("--count", st.count, "Number of random traces")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*validate) return cmd_validate(validate_surface);
    if (*tr) return cmd_trace(ta);
    if (*sad) return cmd_saddles(sa);
    if (*cyl) return cmd_cylinders(ca);
    if (*den) return cmd_density(da);
    if (*cov) return cmd_cover(co);
    if (*exp) return cmd_experiment(ea);
    if (*self) return cmd_selftest(st);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
