// Command-line front end: simulate, analyze, quadruples, coincidence, fine,
// qt and eberhard. Exit codes: 0 ok, 1 usage, 2 analysis error.

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "eprb/coincidence.hpp"
#include "eprb/inequalities.hpp"
#include "eprb/io.hpp"
#include "eprb/moments.hpp"
#include "eprb/qt.hpp"
#include "eprb/quadruples.hpp"
#include "eprb/simulators.hpp"

namespace {

using json = nlohmann::json;
constexpr const char* kVersion = "eprb 1.0.0";

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw eprb::Error("SHA-256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return ss.str();
}

struct Run {
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  json config = json::object();
  std::vector<std::string> outputs;

  void write(const std::string& path, const std::string& text) {
    eprb::io::write_text(path, text);
    outputs.push_back(path);
  }

  // Command line, seed, config hash, version and output digests; no clock
  // values so that reruns are byte-identical.
  void manifest(const std::string& prefix) const {
    json m;
    m["command_line"] = argv;
    m["seed"] = seed;
    m["config_hash"] = sha256_hex(config.dump());
    m["config"] = config;
    m["tool_version"] = kVersion;
    json dig = json::object();
    for (const auto& p : outputs) dig[p] = sha256_hex(eprb::io::read_text(p));
    m["outputs"] = dig;
    eprb::io::write_text(prefix + ".manifest.json", m.dump(2) + "\n");
  }
};

std::string csv_or_json(const json& j, const std::string& format) {
  if (format == "json") return j.dump(2) + "\n";
  std::ostringstream ss;
  ss << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) ss << it.key() << ',' << it.value().dump() << '\n';
  return ss.str();
}

void emit(Run& run, const json& j, const std::string& out, const std::string& format) {
  const std::string text = csv_or_json(j, format);
  std::cout << text;
  if (!out.empty()) {
    run.write(out + (format == "json" ? ".json" : ".csv"), text);
    run.manifest(out);
  }
}

eprb::Settings4 make_settings(const std::vector<double>& deg, const std::string& kind) {
  if (deg.size() != 4) throw CLI::ValidationError("--angles", "four angles a b c d are required");
  if (kind == "photon") return eprb::Settings4::photon_degrees(deg[0], deg[1], deg[2], deg[3]);
  if (kind == "spin") return eprb::Settings4::planar_spin_degrees(deg[0], deg[1], deg[2], deg[3]);
  throw CLI::ValidationError("--kind", "must be photon or spin");
}

eprb::Quartet read_quartet(const std::vector<std::string>& files) {
  if (files.size() != 4) throw CLI::ValidationError("--in", "four pair files are required");
  eprb::Quartet q;
  for (int k = 0; k < 4; ++k) q[k] = eprb::io::read_dataset(files[k], k + 1);
  return q;
}

json correlations_json(const eprb::CorrelationQuartet& c) { return json::array({c[0], c[1], c[2], c[3]}); }

json interval_json(const eprb::Interval& iv) { return json::array({iv.lo, iv.hi}); }

int run_cli(int argc, char** argv) {
  CLI::App app{"Discrete EPRB data: generation, model-free inequalities and quadruple analysis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Run run;
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

  std::string format = "json";
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate datasets from a model");
  std::string model = "singlet", kind = "auto", out, mode = "anti", intensity = "exp", mu = "exp4", rule = "periodic";
  std::uint64_t seed = 0;
  std::size_t n = 1000;
  std::vector<double> angles{0, 90, 45, 135}, M1{0, 0, 0}, M2{0, 0, 0};
  double q = 1, T0 = 1, W = 1, phi0 = 90;
  int d = 4;
  std::int64_t K = 1;
  bool cfd = false;
  sim->add_option("--model", model, "singlet|product|bell_toy|bell_toy_malus|timetag|local_threshold|maxwell|classical_spins|eeprb|finite_lambda")
      ->required();
  sim->add_option("--n", n, "Pairs (or emissions) per run")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--angles", angles, "Settings a b c d in degrees")->expected(4);
  sim->add_option("--kind", kind, "photon|spin|auto");
  sim->add_option("--q", q, "Correlation strength for the singlet sampler");
  sim->add_option("--M1", M1, "Product-state vector, station 1")->expected(3);
  sim->add_option("--M2", M2, "Product-state vector, station 2")->expected(3);
  sim->add_flag("--cfd", cfd, "Reuse one hidden-variable stream for all four conditions");
  sim->add_option("--d", d, "Delay exponent");
  sim->add_option("--T0", T0, "Maximum delay");
  sim->add_option("--mode", mode, "anti|parallel")->check(CLI::IsMember({"anti", "parallel"}));
  sim->add_option("--W", W, "Local threshold window");
  sim->add_option("--phi0", phi0, "Maxwell polarization offset in degrees");
  sim->add_option("--intensity", intensity, "exp|constant")->check(CLI::IsMember({"exp", "constant"}));
  sim->add_option("--mu", mu, "exp4|two_delta")->check(CLI::IsMember({"exp4", "two_delta"}));
  sim->add_option("--K", K, "Number of hidden-variable values");
  sim->add_option("--rule", rule, "periodic|uniform")->check(CLI::IsMember({"periodic", "uniform"}));
  sim->add_option("--out", out, "Output prefix")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Bell-CHSH and model-free bound for four datasets");
  std::vector<std::string> in_files;
  std::string ana_out;
  ana->add_option("--in", in_files, "Four pair CSV files")->expected(4)->required();
  ana->add_option("--out", ana_out, "Report prefix");

  // quadruples
  auto* quad = app.add_subcommand("quadruples", "Maximum fraction of quadruples");
  std::string method = "lp", quad_out;
  quad->add_option("--in", in_files, "Four pair CSV files")->expected(4)->required();
  quad->add_option("--method", method, "lp|naive|cellwise|brute")->check(CLI::IsMember({"lp", "naive", "cellwise", "brute"}));
  quad->add_option("--out", quad_out, "Report prefix");

  // coincidence
  auto* coin = app.add_subcommand("coincidence", "Time-coincidence pairing and W scans");
  std::string left, right, wscan, pairing = "emission_indexed", coin_out;
  double coin_W = -1;
  coin->add_option("--left", left, "Station 1 raw CSV")->required();
  coin->add_option("--right", right, "Station 2 raw CSV")->required();
  auto* w_opt = coin->add_option("--W", coin_W, "Single window; writes the four pair files");
  coin->add_option("--wscan", wscan, "Log grid lo:hi:n; writes the scan CSV")->excludes(w_opt);
  coin->add_option("--pairing", pairing, "emission_indexed|nearest_tag")
      ->check(CLI::IsMember({"emission_indexed", "nearest_tag"}));
  coin->add_option("--out", coin_out, "Output path (scan) or prefix (pairs)")->required();

  // fine
  auto* fine = app.add_subcommand("fine", "Lemma I interval and Fine's quadrivariate");
  std::string moments_file, fine_out;
  fine->add_option("--moments", moments_file, "JSON with k1 k2 k3 k4 k13 k14 k23 k24")->required();
  fine->add_option("--out", fine_out, "Report prefix");

  // qt
  auto* qtc = app.add_subcommand("qt", "Quantum-theoretical reference");
  qtc->require_subcommand(1);
  auto* nogo = qtc->add_subcommand("nogo", "Eigenvalues of (1 - q sigma1.sigma2)/4");
  double nogo_q = 1;
  nogo->add_option("--q", nogo_q, "q")->required();
  auto* circ = qtc->add_subcommand("circuit", "Ideal singlet circuit");
  double alpha = 0, beta = 45;
  bool transpiled = false;
  circ->add_option("--alpha", alpha, "Angle on qubit i, degrees");
  circ->add_option("--beta", beta, "Angle on qubit j, degrees");
  circ->add_flag("--transpiled", transpiled, "Use the native-gate version");
  auto* cir = qtc->add_subcommand("cirelson", "Grid search for the maximum Bell-CHSH value");
  int grid = 72;
  cir->add_option("--grid", grid, "Angles per setting")->check(CLI::Range(1, 200));

  // eberhard
  auto* eb = app.add_subcommand("eberhard", "Eberhard count bound");
  std::vector<std::int64_t> counts, trials;
  std::string eb_out;
  eb->add_option("--counts", counts, "N++(a,c) N+0(a,d) N0+(b,c) N++(b,d)")->expected(4)->required();
  eb->add_option("--trials", trials, "Trials per setting")->expected(4)->required();
  eb->add_option("--out", eb_out, "Report prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      run.seed = seed;
      eprb::ModelConfig cfg;
      cfg.kind = eprb::parse_model(model);
      cfg.q = q;
      cfg.M1 = {M1[0], M1[1], M1[2]};
      cfg.M2 = {M2[0], M2[1], M2[2]};
      cfg.cfd = cfd;
      cfg.tpm = {d, T0, mode == "anti" ? eprb::SourceMode::anti : eprb::SourceMode::parallel};
      cfg.W = W;
      cfg.phi0 = eprb::deg(phi0);
      cfg.intensity = intensity == "exp" ? eprb::Intensity::exp : eprb::Intensity::constant;
      cfg.mu.kind = mu == "exp4" ? eprb::SpinDensity::Kind::exp4 : eprb::SpinDensity::Kind::two_delta;
      cfg.K = K;
      cfg.rule = rule == "periodic" ? eprb::LambdaRule::periodic : eprb::LambdaRule::uniform;
      if (kind == "auto") {
        const bool spin = cfg.kind == eprb::ModelKind::singlet || cfg.kind == eprb::ModelKind::product ||
                          cfg.kind == eprb::ModelKind::eeprb || cfg.kind == eprb::ModelKind::classical_spins;
        kind = spin ? "spin" : "photon";
      }
      const auto settings = make_settings(angles, kind);
      run.config = {{"model", model}, {"n", n},    {"angles", angles}, {"kind", kind},     {"q", q},
                    {"M1", M1},       {"M2", M2},  {"cfd", cfd},       {"d", d},           {"T0", T0},
                    {"mode", mode},   {"W", W},    {"phi0", phi0},     {"intensity", intensity},
                    {"mu", mu},       {"K", K},    {"rule", rule}};
      const auto data = eprb::generate(cfg, settings, n, seed);
      if (data.pairs) {
        for (int k = 0; k < 4; ++k) {
          const std::string base = out + "_s" + std::to_string(k + 1);
          eprb::io::write_pairs(base + ".csv", (*data.pairs)[k]);
          run.outputs.push_back(base + ".csv");
          run.write(base + ".json", eprb::io::condition_json((*data.pairs)[k].condition).dump() + "\n");
        }
      }
      if (data.raw) {
        eprb::io::write_raw(out + "_left.csv", data.raw->left);
        eprb::io::write_raw(out + "_right.csv", data.raw->right);
        run.outputs.push_back(out + "_left.csv");
        run.outputs.push_back(out + "_right.csv");
        json conds = json::array();
        for (int k = 1; k <= 4; ++k) conds.push_back(eprb::io::condition_json(settings.condition(k)));
        run.write(out + "_conditions.json", conds.dump() + "\n");
      }
      if (data.lambdas) {
        json l = json::array();
        for (const auto& v : *data.lambdas) l.push_back(v);
        run.write(out + "_lambdas.json", l.dump() + "\n");
      }
      if (data.stats) {
        json s = json::array();
        for (const auto& st : *data.stats) s.push_back({{"e1", st.e1}, {"e2", st.e2}, {"e12", st.e12}});
        run.write(out + "_stats.json", s.dump(2) + "\n");
      }
      run.manifest(out);
      return 0;
    }

    if (*ana) {
      run.config = {{"command", "analyze"}, {"in", in_files}};
      auto quartet = eprb::truncate_equal(read_quartet(in_files));
      const auto c = eprb::correlations(quartet);
      const auto sol = eprb::delta_lp(quartet);
      const auto rep = eprb::model_free_check(c, sol.delta());
      json j = {{"S", rep.s_chsh},          {"lhs_minus", rep.lhs_minus}, {"lhs_plus", rep.lhs_plus},
                {"delta", sol.delta()},     {"bound", rep.bound},         {"violations", rep.violations},
                {"satisfied", rep.satisfied}, {"correlations", correlations_json(c)}, {"N", sol.N}};
      emit(run, j, ana_out, format);
      return 0;
    }

    if (*quad) {
      run.config = {{"command", "quadruples"}, {"in", in_files}, {"method", method}};
      auto quartet = eprb::truncate_equal(read_quartet(in_files));
      json j;
      if (method == "lp") {
        const auto sol = eprb::delta_lp(quartet);
        j = {{"delta", sol.delta()}, {"m", sol.m}, {"U", sol.U}, {"N", sol.N}, {"exact_fallback", sol.exact_fallback}};
      } else if (method == "naive") {
        j = {{"delta", eprb::delta_naive(quartet)}};
      } else if (method == "cellwise") {
        j = {{"delta", eprb::delta_cellwise(eprb::count_table(quartet))}};
      } else {
        j = {{"delta", eprb::delta_bruteforce(quartet)}};
      }
      emit(run, j, quad_out, format);
      return 0;
    }

    if (*coin) {
      run.config = {{"command", "coincidence"}, {"left", left}, {"right", right}, {"pairing", pairing},
                    {"W", coin_W}, {"wscan", wscan}};
      const auto l = eprb::io::read_raw(left, 1), r = eprb::io::read_raw(right, 2);
      const auto p = pairing == "emission_indexed" ? eprb::Pairing::emission_indexed : eprb::Pairing::nearest_tag;
      if (!wscan.empty()) {
        const auto parts = [&] {
          std::vector<std::string> v;
          std::stringstream ss(wscan);
          for (std::string s; std::getline(ss, s, ':');) v.push_back(s);
          return v;
        }();
        if (parts.size() != 3) throw CLI::ValidationError("--wscan", "expected lo:hi:n");
        const auto grid_w = eprb::log_grid(eprb::io::parse_double(parts[0]), eprb::io::parse_double(parts[1]),
                                           static_cast<std::size_t>(eprb::io::parse_int(parts[2])));
        const auto rows = eprb::w_scan(l, r, grid_w, p);
        std::ostringstream ss;
        ss << "W,S,e12_1,e12_2,e12_3,e12_4,e1_1,e1_2,e1_3,e1_4,e2_1,e2_2,e2_3,e2_4,kept_1,kept_2,kept_3,kept_4\n";
        for (const auto& row : rows) {
          ss << eprb::io::format_double(row.W) << ',' << eprb::io::format_double(row.S);
          for (double v : row.e12) ss << ',' << eprb::io::format_double(v);
          for (double v : row.e1) ss << ',' << eprb::io::format_double(v);
          for (double v : row.e2) ss << ',' << eprb::io::format_double(v);
          for (auto v : row.kept) ss << ',' << v;
          ss << '\n';
        }
        run.write(coin_out, ss.str());
        json flags = json::array();
        if (rows.size() >= 2) {
          for (const auto& e : eprb::drift_diagnostic(rows).entries)
            if (e.flagged)
              flags.push_back({{"W", e.W}, {"station", e.station}, {"setting", std::string(1, e.setting)},
                               {"spread", e.spread}, {"sigma", e.sigma}});
        }
        std::cout << json{{"rows", rows.size()}, {"drift_flags", flags}}.dump(2) << "\n";
        run.manifest(coin_out);
        return 0;
      }
      if (!(coin_W >= 0)) throw CLI::ValidationError("--W", "give --W or --wscan");
      const auto res = eprb::pair_events_detailed(l, r, {coin_W, p});
      for (int k = 0; k < 4; ++k) {
        const std::string base = coin_out + "_s" + std::to_string(k + 1);
        eprb::io::write_pairs(base + ".csv", res.data[k]);
        run.outputs.push_back(base + ".csv");
      }
      std::cout << json{{"kept", res.kept}, {"n_used", res.data[0].size()}}.dump(2) << "\n";
      run.manifest(coin_out);
      return 0;
    }

    if (*fine) {
      const auto mj = json::parse(eprb::io::read_text(moments_file));
      run.config = mj;
      eprb::MomentSet4 m{mj.value("k1", 0.0),  mj.value("k2", 0.0),  mj.value("k3", 0.0),  mj.value("k4", 0.0),
                         mj.value("k13", 0.0), mj.value("k14", 0.0), mj.value("k23", 0.0), mj.value("k24", 0.0)};
      const auto r = eprb::pipeline_fine(m);
      json j = {{"k34_interval", interval_json(r.k34_interval)},
                {"k134_interval", interval_json(r.k134_interval)},
                {"k234_interval", interval_json(r.k234_interval)},
                {"k34", r.k34},
                {"k134", r.k134},
                {"k234", r.k234},
                {"k12", r.k12},
                {"max_marginal_error", r.max_marginal_error},
                {"f", r.f}};
      emit(run, j, fine_out, format);
      return 0;
    }

    if (*qtc) {
      json j;
      if (*nogo) {
        const auto r = eprb::qt::nogo_check(nogo_q);
        j = {{"q", nogo_q}, {"valid", r.valid}, {"eigenvalues", r.eigenvalues}};
      } else if (*circ) {
        const auto c = transpiled ? eprb::qt::singlet_circuit_transpiled(eprb::deg(alpha), eprb::deg(beta))
                                  : eprb::qt::singlet_circuit(eprb::deg(alpha), eprb::deg(beta));
        const auto p = eprb::qt::circuit_probabilities(c);
        const auto e = eprb::qt::circuit_expectations(p);
        j = {{"probabilities", {{"00", p[0]}, {"01", p[1]}, {"10", p[2]}, {"11", p[3]}}},
             {"e1", e.e1},
             {"e2", e.e2},
             {"e12", e.e12}};
      } else {
        const auto r = eprb::qt::cirelson_grid_max(grid);
        j = {{"max", r.max},
             {"angles_deg", {r.angles[0] * 180 / std::numbers::pi, r.angles[1] * 180 / std::numbers::pi,
                             r.angles[2] * 180 / std::numbers::pi, r.angles[3] * 180 / std::numbers::pi}}};
      }
      std::cout << csv_or_json(j, format);
      return 0;
    }

    if (*eb) {
      run.config = {{"command", "eberhard"}, {"counts", counts}, {"trials", trials}};
      const auto r = eprb::eberhard_counts({counts[0], counts[1], counts[2], counts[3]},
                                           {trials[0], trials[1], trials[2], trials[3]});
      json j = {{"N", r.N}, {"rescaled", r.rescaled}, {"J", r.J}, {"j_over_n", r.j_over_n}, {"delta_upper", r.delta_upper}};
      emit(run, j, eb_out, format);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const eprb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
