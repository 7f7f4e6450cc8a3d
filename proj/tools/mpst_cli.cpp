// mpst: command-line front end for checking, analysing and running .mpst
// programs.
//
// Exit codes: 0 ok, 1 property/typecheck failure, 2 undecided (infinite
// behavioural set at the configured budget), 3 parse/validation error,
// 4 step limit reached.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpst/mpst.hpp"

using json = nlohmann::json;
using namespace mpst;

namespace {

struct Common {
  std::string file;
  bool jsonOut = false;
  std::size_t budget = kDefaultBudget;
};

std::string readFile(const std::string& path, std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open " + path;
    return "";
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json diagsToJson(const std::string& file, const std::vector<Diagnostic>& diags) {
  json arr = json::array();
  for (auto& d : diags) {
    json j;
    j["pos"] = file + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col);
    j["message"] = d.message;
    arr.push_back(j);
  }
  return arr;
}

void printDiags(const std::string& file, const std::vector<Diagnostic>& diags) {
  for (auto& d : diags)
    std::cerr << file << ":" << d.pos.line << ":" << d.pos.col << ": " << d.message << "\n";
}

json baseJson(const std::string& command, const Common& c, const std::string& verdict,
              long long ms) {
  json j;
  j["command"] = command;
  j["file"] = c.file;
  j["verdict"] = verdict;
  j["diagnostics"] = json::array();
  j["property"] = nullptr;
  j["budget"] = c.budget;
  j["timing-ms"] = ms;
  return j;
}

int emit(const json& j, bool jsonOut, const std::string& human) {
  if (jsonOut) std::cout << j.dump(2) << "\n";
  else std::cout << human;
  std::string v = j["verdict"];
  if (v == "ok") return 0;
  if (v == "fail") return 1;
  if (v == "unknown") return 2;
  return 3;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 start)
        .count();
  }
};

std::optional<Program> load(const Common& c, const std::string& cmd, int& rc, bool jsonOut) {
  std::string err;
  std::string text = readFile(c.file, err);
  if (!err.empty()) {
    json j = baseJson(cmd, c, "error", 0);
    j["diagnostics"].push_back({{"pos", c.file}, {"message", err}});
    if (jsonOut) std::cout << j.dump(2) << "\n";
    else std::cerr << err << "\n";
    rc = 3;
    return std::nullopt;
  }
  auto res = parse(text);
  if (!res.program) {
    json j = baseJson(cmd, c, "error", 0);
    j["diagnostics"] = diagsToJson(c.file, res.diagnostics);
    if (jsonOut) std::cout << j.dump(2) << "\n";
    else printDiags(c.file, res.diagnostics);
    rc = 3;
    return std::nullopt;
  }
  auto vd = validate(*res.program);
  if (!vd.empty()) {
    json j = baseJson(cmd, c, "error", 0);
    j["diagnostics"] = diagsToJson(c.file, vd);
    if (jsonOut) std::cout << j.dump(2) << "\n";
    else printDiags(c.file, vd);
    rc = 3;
    return std::nullopt;
  }
  return res.program;
}

int cmdCheck(const Common& c, const std::string& property) {
  Timer timer;
  int rc = 0;
  auto prog = load(c, "check", rc, c.jsonOut);
  if (!prog) return rc;
  auto propOpt = propertyFromName(property);
  if (!propOpt) {
    std::cerr << "unknown property: " << property << "\n";
    return 3;
  }
  CheckOptions opts;
  opts.property = *propOpt;
  opts.budget = c.budget;
  Verdict v = checkProgram(*prog, opts);
  std::string verdict = v.ok() ? "ok" : (v.status == Verdict::Status::Unknown ? "unknown" : "fail");
  json j = baseJson("check", c, verdict, timer.ms());
  j["property"] = property;
  j["diagnostics"] = diagsToJson(c.file, v.diagnostics);
  std::string human = c.file + ": " + verdict + " (property: " + property + ")\n";
  if (!v.ok()) {
    std::ostringstream os;
    os << human;
    for (auto& d : v.diagnostics)
      os << "  " << c.file << ":" << d.pos.line << ":" << d.pos.col << ": " << d.message << "\n";
    human = os.str();
  }
  return emit(j, c.jsonOut, human);
}

int cmdBeh(const Common& c, bool dump) {
  Timer timer;
  int rc = 0;
  auto prog = load(c, "beh", rc, c.jsonOut);
  if (!prog) return rc;
  if (prog->protocols.empty()) {
    std::cerr << c.file << ": no protocol declaration\n";
    return 3;
  }
  TypingContext root = assoc("s", prog->protocols[0].second);
  BehResult beh = computeBeh(root, c.budget);
  json j = baseJson("beh", c, beh.finite ? "ok" : "unknown", timer.ms());
  std::ostringstream human;
  json g;
  if (beh.finite) {
    g["finite"] = true;
    g["states"] = beh.states.size();
    g["canonical-states"] = beh.repCount;
    g["edges"] = beh.reach.edges.size();
    human << "Finite: " << beh.states.size() << " states ("
          << beh.repCount << " canonical, " << beh.reach.edges.size() << " edges)\n";
  } else {
    g["finite"] = false;
    g["reason"] = beh.why == BehResult::Why::Budget ? "budget" : "crcp";
    g["witness"] = beh.witness;
    human << "Infinite (budget): " << beh.witness << "\n";
  }
  if (dump) {
    std::string d = dumpBehGraph(beh);
    g["dump"] = d;
    human << d;
  }
  j["graph"] = g;
  return emit(j, c.jsonOut, human.str());
}

json stratToJson(const StratVerdict& v) {
  json j;
  j["verdict"] = v.verdictName();
  j["mode"] = strategyModeName(v.mode);
  j["witnesses"] = v.witnesses;
  if (v.crcpCount) j["crcp-count"] = v.crcpCount;
  return j;
}

int cmdStrategy(const Common& c, const std::string& mode) {
  Timer timer;
  int rc = 0;
  auto prog = load(c, "strategy", rc, c.jsonOut);
  if (!prog) return rc;
  if (prog->protocols.empty()) {
    std::cerr << c.file << ": no protocol declaration\n";
    return 3;
  }
  const Protocol& proto = prog->protocols[0].second;
  StrategyReport rep;
  if (mode.empty()) {
    rep = recommend(proto);
  } else {
    auto m = strategyModeFromName(mode);
    if (!m) {
      std::cerr << "unknown mode: " << mode << "\n";
      return 3;
    }
    rep.tf = trivFinite(proto, *m);
    rep.lf = loopFree(proto, *m);
    rep.mode = *m;
    rep.finiteGuaranteed = rep.tf.holds() || rep.lf.holds();
    rep.summary = rep.finiteGuaranteed ? "finite behavioural set guaranteed"
                                       : "no finiteness guarantee at this mode";
  }
  json j = baseJson("strategy", c, rep.finiteGuaranteed ? "ok" : "unknown", timer.ms());
  json s;
  s["tf"] = stratToJson(rep.tf);
  s["lf"] = stratToJson(rep.lf);
  s["mode"] = strategyModeName(rep.mode);
  s["finite-guaranteed"] = rep.finiteGuaranteed;
  s["summary"] = rep.summary;
  j["strategy"] = s;
  std::ostringstream human;
  human << "tf: " << rep.tf.verdictName() << " (mode " << strategyModeName(rep.tf.mode) << ")\n";
  for (auto& w : rep.tf.witnesses) human << "  " << w << "\n";
  human << "lf: " << rep.lf.verdictName() << " (mode " << strategyModeName(rep.lf.mode) << ")";
  if (rep.lf.crcpCount) human << " [" << rep.lf.crcpCount << " CRCP]";
  human << "\n";
  for (auto& w : rep.lf.witnesses) human << "  " << w << "\n";
  human << rep.summary << "\n";
  return emit(j, c.jsonOut, human.str());
}

int cmdRun(const Common& c, const std::string& scheduler, std::uint64_t seed, bool seedSet,
           std::size_t maxSteps, bool step) {
  Timer timer;
  int rc = 0;
  auto prog = load(c, "run", rc, c.jsonOut);
  if (!prog) return rc;
  Config cfg = normalize(prog->main);
  json j = baseJson("run", c, "ok", 0);
  std::ostringstream human;
  json trace = json::array();
  bool stepLimit = false;

  if (step) {
    auto res = runInteractive(cfg, [&](const std::vector<StepLabel>& labs) {
      std::cout << "choose a step:\n";
      for (std::size_t i = 0; i < labs.size(); ++i)
        std::cout << "  [" << i << "] " << labs[i].show() << "\n";
      std::cout << "> " << std::flush;
      int pick = -1;
      if (!(std::cin >> pick)) return -1;
      return pick;
    }, maxSteps);
    for (auto& lab : res.trace) trace.push_back(lab.show());
    human << "trace (" << res.trace.size() << " steps)\n";
    human << "final configuration:\n" << print(res.final);
    stepLimit = res.stepLimit;
  } else if (scheduler == "exhaustive") {
    auto res = runExhaustive(cfg, maxSteps);
    stepLimit = res.stepLimit;
    std::size_t blocked = 0;
    for (auto& t : res.terminals)
      if (blockedThreads(t) > 0) ++blocked;
    human << "explored " << res.statesExplored << " states, " << res.terminals.size()
          << " terminal, " << blocked << " with blocked threads\n";
    if (!res.terminals.empty()) human << "terminal configuration:\n" << print(res.terminals[0]);
    j["terminals"] = res.terminals.size();
    j["blocked-terminals"] = blocked;
    j["states"] = res.statesExplored;
  } else if (scheduler == "random") {
    if (!seedSet) {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    human << "seed: " << seed << "\n";
    auto res = runRandom(cfg, seed, maxSteps);
    stepLimit = res.stepLimit;
    for (auto& lab : res.trace) {
      trace.push_back(lab.show());
      human << lab.show() << "\n";
    }
    human << "final configuration:\n" << print(res.final);
    j["seed"] = seed;
  } else {
    std::cerr << "unknown scheduler: " << scheduler << "\n";
    return 3;
  }
  j["trace"] = trace;
  j["timing-ms"] = timer.ms();
  if (stepLimit) {
    j["verdict"] = "step-limit";
    if (c.jsonOut) std::cout << j.dump(2) << "\n";
    else std::cout << human.str() << "step limit reached\n";
    return 4;
  }
  if (c.jsonOut) std::cout << j.dump(2) << "\n";
  else std::cout << human.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPST! protocol checker and interpreter"};
  app.require_subcommand(1);

  std::size_t defaultBudget = kDefaultBudget;
  if (const char* env = std::getenv("MPST_BUDGET")) defaultBudget = std::strtoull(env, nullptr, 10);

  Common common;
  common.budget = defaultBudget;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("file", common.file, "input .mpst file")->required();
    sub->add_flag("--json", common.jsonOut, "machine-readable JSON output");
    sub->add_option("--budget", common.budget, "behavioural-set state budget");
  };

  std::string property = "safety";
  auto* check = app.add_subcommand("check", "parse, validate and typecheck a program");
  addCommon(check);
  check->add_option("--property", property, "safety | deadlock-free | terminating");

  bool dump = false;
  auto* beh = app.add_subcommand("beh", "explore the behavioural set of the first protocol");
  addCommon(beh);
  beh->add_flag("--dump", dump, "dump the state/edge graph");

  std::string mode;
  auto* strat = app.add_subcommand("strategy", "run the decidability pre-analyses");
  addCommon(strat);
  strat->add_option("--mode", mode, "exact | approx | approx-unique-labels");

  std::string scheduler = "random";
  std::uint64_t seed = 0;
  bool stepFlag = false;
  std::size_t maxSteps = 10000;
  auto* run = app.add_subcommand("run", "execute the main process");
  addCommon(run);
  run->add_option("--scheduler", scheduler, "exhaustive | random");
  auto* seedOpt = run->add_option("--seed", seed, "random scheduler seed");
  run->add_option("--max-steps", maxSteps, "step / state limit");
  run->add_flag("--step", stepFlag, "interactively choose each step");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) return cmdCheck(common, property);
  if (beh->parsed()) return cmdBeh(common, dump);
  if (strat->parsed()) return cmdStrategy(common, mode);
  if (run->parsed()) return cmdRun(common, scheduler, seed, seedOpt->count() > 0, maxSteps, stepFlag);
  return 3;
}
