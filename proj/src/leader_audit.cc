#include <algorithm>
#include <cmath>
#include <map>

#include "qle/errors.h"
#include "qle/leader.h"

namespace qle {

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j;
  j["violations"] = violations;
  j["phases_used"] = phases_used;
  return j;
}

std::vector<nlohmann::json> AuditReport::trace_lines() const {
  std::vector<nlohmann::json> out;
  for (const auto& p : phases) {
    nlohmann::json j = p.detail;
    if (p.m) j["m"] = p.m;
    j["phase"] = p.phase;
    j["k"] = p.k;
    j["eligible"] = p.eligible;
    j["eligible_after"] = p.eligible_after;
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

using Events = std::vector<const nlohmann::json*>;

std::map<int, Events> by_phase(const RunStats& stats, const std::string& alg, int m) {
  std::map<int, Events> out;
  for (const auto& e : stats.events) {
    if (e.value("alg", "") != alg) continue;
    if (m && e.value("m", 0) != m) continue;
    out[e["phase"].get<int>()].push_back(&e);
  }
  return out;
}

void check_parties(const std::map<int, Events>& phases, int n, const std::string& what, AuditReport& report) {
  std::vector<int> last(n, 1);  // 1 eligible, 0 not
  for (const auto& [phase, events] : phases) {
    if (static_cast<int>(events.size()) != n) {
      report.violations.push_back(what + " phase " + std::to_string(phase) + ": " +
                                  std::to_string(events.size()) + " party records, expected " + std::to_string(n));
      continue;
    }
    for (const auto* e : events) {
      const int party = (*e)["party"].get<int>();
      const int now = (*e)["eligible"].get<bool>() ? 1 : 0;
      if (now > last[party])
        report.violations.push_back(what + " phase " + std::to_string(phase) + ": party became eligible again");
      last[party] = now;
    }
  }
}

}  // namespace

AuditReport audit_alg1(const RunStats& stats, int n) {
  AuditReport report;
  auto phases = by_phase(stats, "alg1", 0);
  check_parties(phases, n, "alg1", report);
  int previous_after = n;
  for (const auto& [phase, events] : phases) {
    PhaseSummary sum;
    sum.phase = phase;
    sum.k = (*events.front())["k"].get<int>();
    std::vector<int> zs;
    bool inconsistent = false;
    for (const auto* e : events) {
      if (!(*e)["eligible"].get<bool>()) continue;
      ++sum.eligible;
      zs.push_back((*e)["z"].get<int>());
      inconsistent = inconsistent || (*e)["inconsistent"].get<int>() != 0;
      if ((*e)["z"] == (*e)["z_max"]) ++sum.eligible_after;
    }
    std::sort(zs.begin(), zs.end());
    const std::string where = "alg1 phase " + std::to_string(phase);
    if (sum.eligible != previous_after) report.violations.push_back(where + ": eligible count changed between phases");
    if (sum.eligible < 1) report.violations.push_back(where + ": no eligible party");
    if (sum.eligible_after < 1) report.violations.push_back(where + ": eligible set emptied");
    if (sum.k == sum.eligible && !inconsistent && sum.eligible >= 2 && zs.front() == zs.back())
      report.violations.push_back(where + ": exact k but every eligible party measured the same z");
    previous_after = sum.eligible_after;
    sum.detail = {{"inconsistent", inconsistent}, {"z", zs}};
    report.phases.push_back(std::move(sum));
  }
  report.phases_used = static_cast<int>(phases.size());
  return report;
}

AuditReport audit_alg2(const RunStats& stats, int n, int exact_m) {
  AuditReport report;
  auto phases = by_phase(stats, "alg2", exact_m);
  check_parties(phases, n, "alg2", report);
  int previous_after = n;
  for (const auto& [phase, events] : phases) {
    PhaseSummary sum;
    sum.m = exact_m;
    sum.phase = phase;
    sum.k = (*events.front())["k"].get<std::int64_t>();
    const std::int64_t c = (*events.front())["c"].get<std::int64_t>();
    std::vector<int> zs;
    std::set<bool> verdicts;
    for (const auto* e : events) {
      verdicts.insert((*e)["consistent"].get<bool>());
      if ((*e)["k"].get<std::int64_t>() != sum.k || (*e)["c"].get<std::int64_t>() != c)
        report.violations.push_back("alg2 phase " + std::to_string(phase) + ": parties disagree on k or c");
      if (!(*e)["eligible"].get<bool>()) continue;
      ++sum.eligible;
      zs.push_back((*e)["z"].get<int>());
      if ((*e)["z"] == (*e)["z_minor"]) ++sum.eligible_after;
    }
    std::sort(zs.begin(), zs.end());
    const std::string where = "alg2 phase " + std::to_string(phase);
    if (verdicts.size() != 1) report.violations.push_back(where + ": parties disagree on consistency");
    if (sum.eligible != previous_after) report.violations.push_back(where + ": eligible count changed between phases");
    if (sum.k != sum.eligible)
      report.violations.push_back(where + ": k = " + std::to_string(sum.k) + " but " + std::to_string(sum.eligible) +
                                  " parties are eligible");
    if (sum.eligible_after < 1) report.violations.push_back(where + ": eligible set emptied");
    if (c != sum.eligible_after) report.violations.push_back(where + ": minority count differs from survivors");
    if (sum.k >= 2 && c > sum.k / 2)
      report.violations.push_back(where + ": minority count " + std::to_string(c) + " exceeds half of k = " +
                                  std::to_string(sum.k));
    previous_after = sum.eligible_after;
    sum.detail = {{"consistent", *verdicts.begin()}, {"z", zs}, {"c", c}, {"z_minor", (*events.front())["z_minor"]}};
    report.phases.push_back(std::move(sum));
  }
  report.phases_used = static_cast<int>(phases.size());
  if (report.phases_used > ceil_log2(n))
    report.violations.push_back("alg2 used " + std::to_string(report.phases_used) + " phases, more than ceil(log2 n)");
  return report;
}

void audit_generalized(const RunStats& stats, int n, int bound, AuditReport& report) {
  std::map<int, std::vector<std::string>> outcomes;
  for (const auto& e : stats.events)
    if (e.value("alg", "") == "guess") outcomes[e["m"].get<int>()].push_back(e["outcome"].get<std::string>());
  for (int m = n + 1; m <= bound; ++m) {
    const auto& o = outcomes[m];
    if (static_cast<int>(o.size()) != n || std::count(o.begin(), o.end(), "error") != n)
      report.violations.push_back("guess m = " + std::to_string(m) + " did not error at every party");
  }
  if (bound >= n) {
    const auto& o = outcomes[n];
    if (std::count(o.begin(), o.end(), "error") != 0)
      report.violations.push_back("guess m = n reported an error");
  }
  for (const auto& out : stats.outputs)
    if (out.value != n) report.violations.push_back("winner " + std::to_string(out.value) + " differs from n");
}

void CatAudit::operator()(const RoundView& view) {
  std::map<std::string, std::vector<qsim::QubitId>> groups;
  for (const auto& [key, q] : view.tags) {
    if (key.second.rfind("cat/", 0) != 0 || done_.count(key.second)) continue;
    groups[key.second].push_back(q);
  }
  for (const auto& [name, qs] : groups) {
    if (static_cast<int>(qs.size()) != n_) continue;
    done_.insert(name);
    ++checked_;
    try {
      auto branches = view.state.factor_state(qs);
      bool ok = branches.size() == 2;
      if (ok) {
        for (std::size_t i = 0; i < qs.size(); ++i) ok = ok && branches[0].first[i] != branches[1].first[i];
        for (const auto& [bits, amp] : branches) ok = ok && std::abs(std::abs(amp) - std::sqrt(0.5)) < 1e-9;
      }
      if (!ok) violations_.push_back(name + ": not a two-term complementary superposition");
    } catch (const UsageError&) {
      violations_.push_back(name + ": entangled with other qubits");
    }
  }
}

}  // namespace qle
