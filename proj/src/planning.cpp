#include "fifth/planning.hpp"

#include "fifth/rng.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace fifth {

std::string emit_horizon_program(const HorizonProblem& p)
{
    if (p.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (p.actions.empty()) throw std::invalid_argument("action set is empty");
    std::ostringstream os;
    os << "; line world: start " << p.start << ", goal " << p.goal << ", horizon " << p.horizon << "\n"
       << "; cost accumulates negated reward, so the best total reward is -result\n"
       << "(def (step t s cost result)\n"
       << "  (cell rem) (cell next) (cell gap) (cell cost2) (cell t2)\n"
       << "  (const horizon " << p.horizon << ")\n"
       << "  (sum t rem horizon)\n"
       << "  (if rem\n"
       << "    ((choose a";
    for (auto a : p.actions) os << ' ' << a;
    os << ")\n"
       << "     (sum s a next)\n"
       << "     (const goal " << p.goal << ")\n"
       << "     (sum gap goal next)\n"
       << "     (if gap ((const c " << -p.step_reward << ")) ((const c " << -(p.step_reward + p.goal_reward) << ")))\n"
       << "     (sum cost c cost2)\n"
       << "     (const one 1)\n"
       << "     (sum t one t2)\n"
       << "     (call step t2 next cost2 result))\n"
       << "    ((equal cost result))))\n"
       << "(query (step (t 0) (s " << p.start << ") (cost 0)) (show result) (minimize result))\n";
    return os.str();
}

std::int64_t horizon_bound(const JobShopInstance& inst)
{
    std::int64_t total = 0;
    for (const auto& job : inst.jobs)
        for (const auto& op : job) total += op.second;
    return total;
}

std::string emit_jobshop_program(const JobShopInstance& inst)
{
    if (inst.machines < 1 || inst.jobs.empty()) throw std::invalid_argument("job shop needs machines and jobs");
    for (const auto& job : inst.jobs) {
        std::set<int> seen;
        for (const auto& [m, d] : job) {
            if (m < 0 || m >= inst.machines) throw std::invalid_argument("operation names an unknown machine");
            if (d <= 0) throw std::invalid_argument("durations must be positive");
            if (!seen.insert(m).second) throw std::invalid_argument("a job visits each machine at most once");
        }
    }
    auto op = [](std::size_t j, std::size_t k) { return std::to_string(j) + "_" + std::to_string(k); };
    const std::int64_t bound = horizon_bound(inst);
    std::ostringstream os;
    os << "; job shop " << (inst.name.empty() ? "instance" : inst.name) << ": " << inst.jobs.size() << " jobs, "
       << inst.machines << " machines\n"
       << "(def (main makespan)\n"
       << "  (int makespan 0 " << bound << ")\n";
    for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
        for (std::size_t k = 0; k < inst.jobs[j].size(); ++k) {
            auto id = op(j, k);
            os << "  (int s" << id << " 0 " << bound << ") (cell e" << id << ") (const d" << id << ' ' << inst.jobs[j][k].second << ") (sum s"
               << id << " d" << id << " e" << id << ")\n";
            if (k > 0) os << "  (lesseq e" << op(j, k - 1) << " s" << id << ")\n";
        }
        os << "  (lesseq e" << op(j, inst.jobs[j].size() - 1) << " makespan)\n";
    }
    int pair = 0;
    for (int m = 0; m < inst.machines; ++m) {
        std::vector<std::string> on;
        for (std::size_t j = 0; j < inst.jobs.size(); ++j)
            for (std::size_t k = 0; k < inst.jobs[j].size(); ++k)
                if (inst.jobs[j][k].first == m) on.push_back(op(j, k));
        for (std::size_t x = 0; x < on.size(); ++x) {
            for (std::size_t y = x + 1; y < on.size(); ++y) {
                std::string b = "b" + std::to_string(pair++);
                os << "  (choose " << b << " 0 1) (if " << b << " ((lesseq e" << on[x] << " s" << on[y]
                   << ")) ((lesseq e" << on[y] << " s" << on[x] << ")))\n";
            }
        }
    }
    os << "  )\n(query (main) (show makespan";
    for (std::size_t j = 0; j < inst.jobs.size(); ++j)
        for (std::size_t k = 0; k < inst.jobs[j].size(); ++k) os << " s" << op(j, k);
    os << ") (minimize makespan))\n";
    return os.str();
}

JobShopInstance jobshop_3x3_a()
{
    return JobShopInstance{"js-3x3-a", 3, {{{0, 3}, {1, 2}, {2, 2}}, {{0, 2}, {2, 1}, {1, 4}}, {{1, 4}, {2, 3}, {0, 1}}}};
}

CspInstance generate_random_csp(int vars, int domain, double density, std::uint64_t seed)
{
    if (vars < 1 || vars > 10) throw std::invalid_argument("vars must be in 1..10");
    if (domain < 1 || domain > 6) throw std::invalid_argument("domain must be in 1..6");
    SplitMix64 rng(seed);
    CspInstance c;
    c.vars = vars;
    c.domain = domain;
    for (int a = 0; a < vars; ++a) {
        for (int b = a + 1; b < vars; ++b) {
            if (!rng.bernoulli(density)) continue;
            auto rel = static_cast<CspRelation>(rng.uniform_int(0, 2));
            int bound = rel == CspRelation::SumAtMost ? static_cast<int>(rng.uniform_int(domain / 2, 2 * (domain - 1))) : 0;
            bool flip = rel != CspRelation::NotEqual && rng.bernoulli(0.5);
            c.constraints.push_back(CspConstraint{rel, flip ? b : a, flip ? a : b, bound});
        }
    }
    std::ostringstream os;
    os << "; random binary CSP: " << vars << " vars, domain " << domain << ", density " << density << ", seed " << seed
       << "\n(def (main";
    for (int v = 0; v < vars; ++v) os << " x" << v;
    os << ")\n";
    for (int v = 0; v < vars; ++v) {
        os << "  (choose x" << v;
        for (int d = 0; d < domain; ++d) os << ' ' << d;
        os << ")\n";
    }
    int z = 0;
    for (const auto& k : c.constraints) {
        switch (k.relation) {
        case CspRelation::NotEqual:
            os << "  (alldiff x" << k.a << " x" << k.b << ")\n";
            break;
        case CspRelation::LessEqual:
            os << "  (lesseq x" << k.a << " x" << k.b << ")\n";
            break;
        case CspRelation::SumAtMost:
            os << "  (int z" << z << " 0 " << k.bound << ") (sum x" << k.a << " x" << k.b << " z" << z << ")\n";
            ++z;
            break;
        }
    }
    os << "  )\n(query (main) (show";
    for (int v = 0; v < vars; ++v) os << " x" << v;
    os << "))\n";
    c.text = os.str();
    return c;
}

std::string emit_queens_program(int n)
{
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::ostringstream os;
    os << "; " << n << "-queens: q<i> is the row of the queen in column i\n(def (main";
    for (int i = 1; i <= n; ++i) os << " q" << i;
    os << ")\n";
    for (int i = 1; i <= n; ++i) {
        os << "  (choose q" << i;
        for (int r = 1; r <= n; ++r) os << ' ' << r;
        os << ") (cell u" << i << ") (cell v" << i << ") (const k" << i << ' ' << i << ") (sum q" << i << " k" << i << " u" << i << ") (sum v" << i << " k" << i
           << " q" << i << ")\n";
    }
    for (char set : {'q', 'u', 'v'}) {
        os << "  (alldiff";
        for (int i = 1; i <= n; ++i) os << ' ' << set << i;
        os << ")\n";
    }
    os << "  )\n(query (main) (show";
    for (int i = 1; i <= n; ++i) os << " q" << i;
    os << "))\n";
    return os.str();
}

std::string emit_sendmore_program()
{
    return R"(; SEND + MORE = MONEY
(def (main S E N D M O R Y)
  (choose S 1 2 3 4 5 6 7 8 9) (choose M 1 2 3 4 5 6 7 8 9)
  (choose E 0 1 2 3 4 5 6 7 8 9) (choose N 0 1 2 3 4 5 6 7 8 9)
  (choose D 0 1 2 3 4 5 6 7 8 9) (choose O 0 1 2 3 4 5 6 7 8 9)
  (choose R 0 1 2 3 4 5 6 7 8 9) (choose Y 0 1 2 3 4 5 6 7 8 9)
  (alldiff S E N D M O R Y)
  (const ten 10)
  (choose c1 0 1) (choose c2 0 1) (choose c3 0 1)
  (cell l1) (cell t1) (cell p2) (cell l2) (cell t2) (cell p3) (cell l3) (cell t3) (cell p4) (cell t4) (cell l4)
  ; D + E = Y + 10 c1
  (sum D E l1) (product c1 ten t1) (sum Y t1 l1)
  ; N + R + c1 = E + 10 c2
  (sum N R p2) (sum p2 c1 l2) (product c2 ten t2) (sum E t2 l2)
  ; E + O + c2 = N + 10 c3
  (sum E O p3) (sum p3 c2 l3) (product c3 ten t3) (sum N t3 l3)
  ; S + M + c3 = O + 10 M
  (sum S M p4) (sum p4 c3 l4) (product M ten t4) (sum O t4 l4))
(query (main) (show S E N D M O R Y))
)";
}

std::string emit_fact_program(int n)
{
    std::ostringstream os;
    os << "; r = n!\n"
       << "(def (fact n r)\n"
       << "  (cell m) (cell rm) (const one 1)\n"
       << "  (if n\n"
       << "    ((sum m one n)\n"
       << "     (call fact m rm)\n"
       << "     (product n rm r))\n"
       << "    ((const r 1))))\n"
       << "(query (fact (n " << n << ")) (show r))\n";
    return os.str();
}

std::string emit_countdown_program(int depth)
{
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    std::ostringstream os;
    os << "; a recursion path of " << depth << " expanded frames\n"
       << "(def (down k done)\n"
       << "  (cell j) (const one 1)\n"
       << "  (if k\n"
       << "    ((sum j one k)\n"
       << "     (call down j done))\n"
       << "    ((const done 1))))\n"
       << "(query (down (k " << depth - 1 << ")) (show done))\n";
    return os.str();
}

}  // namespace fifth
