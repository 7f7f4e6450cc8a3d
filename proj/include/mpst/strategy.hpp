// Decidability pre-analyses on protocols: trivially-finite (Def 7), loop
// freedom via CRCP detection (Def 8), and the role-variable approximations.
//
// Both analyses work on a site graph extracted from the declared types:
// nodes are replicated-branch sites and recursive-binder sites, edges are
// may-send-to relations. Role variables in selection targets resolve to
// candidate role sets; the resolution mode is the approximation level.
#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mpst/ast.hpp"
#include "mpst/print.hpp"

namespace mpst {

enum class StrategyMode { Exact, Approx, ApproxUniqueLabels };

inline const char* strategyModeName(StrategyMode m) {
  switch (m) {
    case StrategyMode::Exact: return "exact";
    case StrategyMode::Approx: return "approx";
    default: return "approx-unique-labels";
  }
}

inline std::optional<StrategyMode> strategyModeFromName(const std::string& s) {
  if (s == "exact") return StrategyMode::Exact;
  if (s == "approx") return StrategyMode::Approx;
  if (s == "approx-unique-labels") return StrategyMode::ApproxUniqueLabels;
  return std::nullopt;
}

struct StratVerdict {
  enum class V { Holds, Fails, ApproxFails };
  V v = V::Holds;
  StrategyMode mode = StrategyMode::Exact;
  std::vector<std::string> witnesses;
  std::size_t crcpCount = 0;  // loop-freedom only
  bool holds() const { return v == V::Holds; }
  std::string verdictName() const {
    switch (v) {
      case V::Holds: return "holds";
      case V::Fails: return "fails";
      default: return "approx-fails";
    }
  }
};

struct StrategyReport {
  StratVerdict tf;
  StratVerdict lf;
  StrategyMode mode = StrategyMode::Exact;  // weakest mode either analysis needed
  bool finiteGuaranteed = false;
  std::string summary;
};

namespace detail {

struct StratSite {
  bool replicated = false;  // else: recursive-binder site
  std::string owner;
  std::string desc;
};

struct StratBinder {
  bool replFrom = false;  // else: branch payload binder
  std::string name;
  int recvOcc = -1;
  int branchIdx = -1;
  int rolePos = -1;  // index among role-singleton payload slots
};

struct StratRecvBranch {
  std::string label;
  std::vector<Role> roleSlots;       // role-singleton payloads, positional
  std::vector<int> roleSlotBinders;  // binder id per slot, -1 for literals
};

struct StratRecv {
  std::string owner;
  bool replicated = false;
  Role from;
  int fromBinder = -1;  // non-replicated variable from, if bound
  std::vector<StratRecvBranch> branches;
  int site = -1;      // innermost enclosing restricted site (-1: unrestricted)
  int selfSite = -1;  // own site, replicated only
  std::string desc;
};

struct StratSend {
  std::string owner;
  Role target;
  int targetBinder = -1;
  std::string label;
  std::vector<Role> roleSlots;
  std::vector<int> roleSlotBinders;
  bool underRec = false, underRepl = false;
  int innermostSite = -1;
  // Non-replicated receive points crossed between the innermost site root
  // and this send; each must be feedable by a restricted sender for the
  // send to take part in a replicated pump.
  std::vector<std::pair<int, int>> guardChain;  // (recvOcc, branchIdx)
  std::string desc;
};

struct Extraction {
  std::vector<StratSite> sites;
  std::vector<StratSend> sends;
  std::vector<StratRecv> recvs;
  std::vector<StratBinder> binders;
  std::set<std::string> allRoles;
  bool hasVarTargets = false;
};

struct ExtractWalker {
  Extraction& ex;
  std::string owner;

  void walk(const Type& t, std::map<std::string, int> env, int innermostSite, bool underRec,
            bool underRepl, std::vector<std::pair<int, int>> guards) {
    using K = SessionType::Kind;
    switch (t->kind) {
      case K::End:
      case K::Var: return;
      case K::Rec: {
        int site = static_cast<int>(ex.sites.size());
        ex.sites.push_back({false, owner, "recursive body at " + owner});
        walk(t->body, env, site, true, underRepl, {});
        return;
      }
      case K::Select: {
        for (auto& op : t->options) {
          StratSend s;
          s.owner = owner;
          s.target = op.to;
          if (op.to.var) {
            ex.hasVarTargets = true;
            auto it = env.find(op.to.name);
            s.targetBinder = it == env.end() ? -1 : it->second;
          }
          s.label = op.label;
          for (auto& p : op.payloads) {
            if (p.kind != Payload::Kind::RoleSing) continue;
            s.roleSlots.push_back(p.role);
            int b = -1;
            if (p.role.var) {
              auto it = env.find(p.role.name);
              b = it == env.end() ? -1 : it->second;
            }
            s.roleSlotBinders.push_back(b);
          }
          s.underRec = underRec;
          s.underRepl = underRepl;
          s.innermostSite = innermostSite;
          s.guardChain = guards;
          s.desc = "send " + op.label + " from " + owner + " to " + op.to.show();
          ex.sends.push_back(std::move(s));
          walk(op.cont, env, innermostSite, underRec, underRepl, guards);
        }
        return;
      }
      case K::Branch: {
        int recvIdx = static_cast<int>(ex.recvs.size());
        StratRecv r;
        r.owner = owner;
        r.replicated = t->replicated;
        r.from = t->from;
        r.site = innermostSite;
        std::string labels;
        for (auto& br : t->branches) labels += (labels.empty() ? "" : ",") + br.label;
        r.desc = std::string(t->replicated ? "replicated branch" : "branch") + " {" + labels +
                 "} at " + owner;
        std::map<std::string, int> env0 = env;
        if (t->replicated) {
          r.selfSite = static_cast<int>(ex.sites.size());
          ex.sites.push_back({true, owner, "replicated branch {" + labels + "} at " + owner});
          // An in-scope name is a reference to the enclosing binder, not a
          // fresh universal-receive binder.
          if (t->from.var && !env.count(t->from.name)) {
            int b = static_cast<int>(ex.binders.size());
            ex.binders.push_back({true, t->from.name, recvIdx, -1, -1});
            env0[t->from.name] = b;
          } else if (t->from.var) {
            r.fromBinder = env.at(t->from.name);
          }
        } else if (t->from.var) {
          auto it = env.find(t->from.name);
          r.fromBinder = it == env.end() ? -1 : it->second;
        }
        ex.recvs.push_back(r);  // branches filled below

        for (std::size_t bi = 0; bi < t->branches.size(); ++bi) {
          auto& br = t->branches[bi];
          StratRecvBranch rb;
          rb.label = br.label;
          std::map<std::string, int> env1 = env0;
          int rolePos = 0;
          for (auto& p : br.payloads) {
            if (p.kind != Payload::Kind::RoleSing) continue;
            rb.roleSlots.push_back(p.role);
            int b = -1;
            if (p.role.var) {
              b = static_cast<int>(ex.binders.size());
              ex.binders.push_back({false, p.role.name, recvIdx, static_cast<int>(bi), rolePos});
              env1[p.role.name] = b;
            }
            rb.roleSlotBinders.push_back(b);
            ++rolePos;
          }
          ex.recvs[recvIdx].branches.push_back(rb);

          int site2 = t->replicated ? ex.recvs[recvIdx].selfSite : innermostSite;
          auto guards2 = t->replicated ? std::vector<std::pair<int, int>>{} : guards;
          if (!t->replicated) guards2.emplace_back(recvIdx, static_cast<int>(bi));
          walk(br.cont, env1, site2, underRec, underRepl || t->replicated, guards2);
        }
        return;
      }
    }
  }
};

inline Extraction extract(const Protocol& p) {
  Extraction ex;
  for (auto& [r, t] : p.roles) ex.allRoles.insert(r);
  for (auto& [r, t] : p.roles) {
    ExtractWalker w{ex, r};
    w.walk(t, {}, -1, false, false, {});
  }
  return ex;
}

struct Resolution {
  enum class Mode { LiteralOnly, AllRoles, Computed };
  Mode mode = Mode::AllRoles;
  std::map<int, std::set<std::string>> binderRoles;
  const Extraction* ex = nullptr;

  std::set<std::string> targets(const StratSend& s) const {
    if (!s.target.var) return {s.target.name};
    if (mode == Mode::LiteralOnly) return {};
    if (mode == Mode::AllRoles || s.targetBinder < 0) return ex->allRoles;
    auto it = binderRoles.find(s.targetBinder);
    return it == binderRoles.end() ? ex->allRoles : it->second;
  }

  std::set<std::string> slotRoles(const StratSend& s, int pos) const {
    if (pos >= static_cast<int>(s.roleSlots.size())) return {};
    const Role& r = s.roleSlots[pos];
    if (!r.var) return {r.name};
    if (mode == Mode::LiteralOnly) return {};
    if (mode == Mode::AllRoles || s.roleSlotBinders[pos] < 0) return ex->allRoles;
    auto it = binderRoles.find(s.roleSlotBinders[pos]);
    return it == binderRoles.end() ? ex->allRoles : it->second;
  }
};

inline bool sendMatchesBranch(const StratSend& s, const StratRecv& r, const StratRecvBranch& rb,
                              const Resolution& res) {
  if (s.label != rb.label) return false;
  if (!res.targets(s).count(r.owner)) return false;
  if (r.replicated) {
    if (!r.from.var && r.from.name != s.owner) return false;
  } else if (r.from.var) {
    if (res.mode == Resolution::Mode::LiteralOnly) return false;
    if (res.mode == Resolution::Mode::Computed && r.fromBinder >= 0) {
      auto it = res.binderRoles.find(r.fromBinder);
      if (it != res.binderRoles.end() && !it->second.count(s.owner)) return false;
    }
  } else if (r.from.name != s.owner) {
    return false;
  }
  return true;
}

// Least-fixpoint binder resolution: starting from nothing, a binder gains
// exactly the roles some matching sender can actually supply, so spurious
// mutual support between variables never enters the solution.
inline Resolution computeResolution(const Extraction& ex) {
  Resolution res;
  res.mode = Resolution::Mode::Computed;
  res.ex = &ex;
  for (std::size_t b = 0; b < ex.binders.size(); ++b)
    res.binderRoles[static_cast<int>(b)] = {};
  for (int round = 0; round < 256; ++round) {
    bool changed = false;
    for (std::size_t bi = 0; bi < ex.binders.size(); ++bi) {
      const StratBinder& b = ex.binders[bi];
      const StratRecv& r = ex.recvs[b.recvOcc];
      std::set<std::string> cand;
      if (b.replFrom) {
        for (auto& s : ex.sends)
          for (auto& rb : r.branches)
            if (sendMatchesBranch(s, r, rb, res)) cand.insert(s.owner);
      } else {
        const StratRecvBranch& rb = r.branches[b.branchIdx];
        for (auto& s : ex.sends) {
          if (!sendMatchesBranch(s, r, rb, res)) continue;
          auto roles = res.slotRoles(s, b.rolePos);
          cand.insert(roles.begin(), roles.end());
        }
      }
      auto& cur = res.binderRoles[static_cast<int>(bi)];
      std::size_t before = cur.size();
      cur.insert(cand.begin(), cand.end());
      if (cur.size() != before) changed = true;
    }
    if (!changed) break;
  }
  return res;
}

inline Resolution literalResolution(const Extraction& ex) {
  Resolution res;
  res.mode = Resolution::Mode::LiteralOnly;
  res.ex = &ex;
  return res;
}

inline Resolution allRolesResolution(const Extraction& ex) {
  Resolution res;
  res.mode = Resolution::Mode::AllRoles;
  res.ex = &ex;
  return res;
}

// --- trivially finite (Def 7) ----------------------------------------------

inline std::vector<std::string> tfViolations(const Extraction& ex, const Resolution& res) {
  std::vector<std::string> out;
  for (auto& s : ex.sends) {
    if (!s.underRec && !s.underRepl) continue;
    for (auto& r : ex.recvs) {
      if (!r.replicated) continue;
      for (auto& rb : r.branches) {
        if (!sendMatchesBranch(s, r, rb, res)) continue;
        std::string where = s.underRec ? "in the body of a recursive binder"
                                       : "in the continuation of a replicated branch";
        out.push_back(s.desc + " (" + where + ") reaches " + r.desc);
      }
    }
  }
  return out;
}

// --- loop freedom (Def 8) ----------------------------------------------------

struct SiteGraph {
  std::vector<std::vector<std::pair<int, std::string>>> edges;  // site -> (site, via-send)
};

inline SiteGraph buildGraph(const Extraction& ex, const Resolution& res) {
  SiteGraph g;
  g.edges.resize(ex.sites.size());
  for (auto& s : ex.sends) {
    if (s.innermostSite < 0) continue;
    // Pump chains break at receives only unrestricted senders can feed.
    bool guarded = true;
    for (auto& [ri, bi] : s.guardChain) {
      const StratRecv& r = ex.recvs[ri];
      const StratRecvBranch& rb = r.branches[bi];
      bool fed = false;
      for (auto& s2 : ex.sends) {
        if (!s2.underRec && !s2.underRepl) continue;
        if (sendMatchesBranch(s2, r, rb, res)) {
          fed = true;
          break;
        }
      }
      if (!fed) {
        guarded = false;
        break;
      }
    }
    if (!guarded) continue;
    for (std::size_t ri = 0; ri < ex.recvs.size(); ++ri) {
      const StratRecv& r = ex.recvs[ri];
      int target = r.replicated ? r.selfSite : r.site;
      if (target < 0) continue;
      for (auto& rb : r.branches) {
        if (!sendMatchesBranch(s, r, rb, res)) continue;
        g.edges[s.innermostSite].emplace_back(target, s.desc);
      }
    }
  }
  return g;
}

struct CrcpResult {
  std::vector<int> crcpSites;
  std::vector<std::string> witnesses;
};

inline CrcpResult findCrcps(const Extraction& ex, const SiteGraph& g) {
  CrcpResult out;
  std::size_t n = ex.sites.size();

  // Recurring sites: recursive binders, members of cycles, and replicated
  // sites transitively fed by recurring sites.
  std::vector<bool> recurring(n, false);
  for (std::size_t i = 0; i < n; ++i)
    if (!ex.sites[i].replicated) recurring[i] = true;

  // Cycle membership: a site is on a cycle iff it can reach itself.
  auto reaches = [&](int from, int to) {
    std::vector<bool> seen(n, false);
    std::deque<int> q{from};
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (auto& [y, via] : g.edges[x]) {
        if (y == to) return true;
        if (!seen[y]) {
          seen[y] = true;
          q.push_back(y);
        }
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (reaches(static_cast<int>(i), static_cast<int>(i))) recurring[i] = true;

  for (;;) {
    bool changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (!recurring[a]) continue;
      for (auto& [b, via] : g.edges[a]) {
        if (ex.sites[b].replicated && !recurring[b]) {
          recurring[b] = true;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  for (std::size_t b = 0; b < n; ++b) {
    if (!ex.sites[b].replicated) continue;
    const std::string* via = nullptr;
    int feeder = -1;
    for (std::size_t a = 0; a < n; ++a) {
      if (!recurring[a]) continue;
      for (auto& [to, v] : g.edges[a]) {
        if (to == static_cast<int>(b)) {
          via = &v;
          feeder = static_cast<int>(a);
          break;
        }
      }
      if (via) break;
    }
    if (!via) continue;
    out.crcpSites.push_back(static_cast<int>(b));
    std::string w = "CRCP at " + ex.sites[b].desc + ": " + *via + " recurs via " +
                    ex.sites[feeder].desc;
    if (reaches(static_cast<int>(b), static_cast<int>(b))) w += " (on a cycle)";
    out.witnesses.push_back(std::move(w));
  }
  return out;
}

inline StratVerdict runTf(const Extraction& ex, const Resolution& res, StrategyMode mode) {
  StratVerdict v;
  v.mode = mode;
  auto viols = tfViolations(ex, res);
  if (viols.empty()) return v;
  v.v = (res.mode == Resolution::Mode::Computed || res.mode == Resolution::Mode::AllRoles) &&
                ex.hasVarTargets
            ? StratVerdict::V::ApproxFails
            : StratVerdict::V::Fails;
  v.witnesses = std::move(viols);
  return v;
}

inline StratVerdict runLf(const Extraction& ex, const Resolution& res, StrategyMode mode) {
  StratVerdict v;
  v.mode = mode;
  auto crcp = findCrcps(ex, buildGraph(ex, res));
  if (crcp.crcpSites.empty()) return v;
  v.v = (res.mode == Resolution::Mode::Computed || res.mode == Resolution::Mode::AllRoles) &&
                ex.hasVarTargets
            ? StratVerdict::V::ApproxFails
            : StratVerdict::V::Fails;
  v.witnesses = std::move(crcp.witnesses);
  v.crcpCount = crcp.crcpSites.size();
  return v;
}

// Run one analysis at the strongest applicable mode: exact when the
// variable-target approximation cannot change the verdict, otherwise the
// refined resolution.
template <class Run>
inline StratVerdict autoMode(const Extraction& ex, Run run) {
  StratVerdict lit = run(literalResolution(ex), StrategyMode::Exact);
  StratVerdict all = run(allRolesResolution(ex), StrategyMode::Exact);
  if (lit.holds() == all.holds() && lit.witnesses == all.witnesses) {
    if (!lit.holds()) lit.v = StratVerdict::V::Fails;
    return lit;  // approximation immaterial
  }
  StratVerdict ref = run(computeResolution(ex), StrategyMode::ApproxUniqueLabels);
  return ref;
}

}  // namespace detail

// Def 7 check at the requested approximation level.
inline StratVerdict trivFinite(const Protocol& p, StrategyMode mode) {
  auto ex = detail::extract(p);
  auto run = [&](const detail::Resolution& r, StrategyMode m) { return detail::runTf(ex, r, m); };
  switch (mode) {
    case StrategyMode::Approx: return run(detail::allRolesResolution(ex), mode);
    case StrategyMode::ApproxUniqueLabels: return run(detail::computeResolution(ex), mode);
    case StrategyMode::Exact: return detail::autoMode(ex, run);
  }
  return {};
}

// Def 8 check at the requested approximation level.
inline StratVerdict loopFree(const Protocol& p, StrategyMode mode) {
  auto ex = detail::extract(p);
  auto run = [&](const detail::Resolution& r, StrategyMode m) { return detail::runLf(ex, r, m); };
  switch (mode) {
    case StrategyMode::Approx: return run(detail::allRolesResolution(ex), mode);
    case StrategyMode::ApproxUniqueLabels: return run(detail::computeResolution(ex), mode);
    case StrategyMode::Exact: return detail::autoMode(ex, run);
  }
  return {};
}

// Runs both analyses in the strongest applicable mode and reports whether a
// finite behavioural set is guaranteed before safety checking.
inline StrategyReport recommend(const Protocol& p) {
  StrategyReport rep;
  auto ex = detail::extract(p);
  rep.tf = detail::autoMode(ex, [&](const detail::Resolution& r, StrategyMode m) {
    return detail::runTf(ex, r, m);
  });
  rep.lf = detail::autoMode(ex, [&](const detail::Resolution& r, StrategyMode m) {
    return detail::runLf(ex, r, m);
  });
  rep.mode = (rep.tf.mode == StrategyMode::Exact && rep.lf.mode == StrategyMode::Exact)
                 ? StrategyMode::Exact
                 : StrategyMode::ApproxUniqueLabels;
  rep.finiteGuaranteed = rep.tf.holds() || rep.lf.holds();
  if (rep.finiteGuaranteed) {
    rep.summary = std::string("finite behavioural set guaranteed (") +
                  (rep.tf.holds() ? "tf" : "lf") + (rep.tf.holds() && rep.lf.holds() ? ", lf" : "") +
                  ")";
  } else {
    rep.summary = "no finiteness guarantee; fall back to budgeted behavioural-set exploration";
  }
  return rep;
}

}  // namespace mpst
