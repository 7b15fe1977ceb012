#include "generators.hpp"

#include <algorithm>
#include <numeric>

namespace vwsim::test {

SparseMatrix random_sparse(int n, double density, std::mt19937_64& rng, bool permute) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    SparseMatrix m;
    m.n = n;
    m.rows.resize(n);
    for (int r = 0; r < n; ++r) {
        auto& row = m.rows[r];
        double offsum = 0.0;
        for (int c = 0; c < n; ++c) {
            if (c == r) {
                row.push_back({c, 0.0});  // placeholder, fixed below
                continue;
            }
            if (u(rng) < density) {
                double v = coef(rng);
                if (v == 0.0) v = 0.5;
                row.push_back({c, v});
                offsum += std::fabs(v);
            }
        }
        double diag = offsum + 1.0 + u(rng);
        if (u(rng) < 0.5) diag = -diag;
        for (auto& e : row)
            if (e.col == r) e.val = diag;
    }

    if (permute) {
        std::vector<int> sigma(n);
        std::iota(sigma.begin(), sigma.end(), 0);
        std::shuffle(sigma.begin(), sigma.end(), rng);
        std::vector<std::vector<SparseEntry>> shuffled(n);
        for (int r = 0; r < n; ++r) shuffled[r] = std::move(m.rows[sigma[r]]);
        m.rows = std::move(shuffled);
    }
    return m;
}

std::vector<std::vector<double>> to_dense(const SparseMatrix& m) {
    std::vector<std::vector<double>> d(m.n, std::vector<double>(m.n, 0.0));
    for (int r = 0; r < m.n; ++r)
        for (const auto& e : m.rows[r]) d[r][e.col] = e.val;
    return d;
}

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    std::vector<double> v(n);
    for (auto& x : v) x = coef(rng);
    return v;
}

TermPtr TermGen::leaf() {
    std::uniform_int_distribution<int> pick(0, 9);
    switch (pick(rng_)) {
        case 0: return t_var("a");
        case 1: return t_var("b");
        case 2: return t_var("c");
        case 3: return t_var("$time$");
        case 4: return t_var("$hn$");
        case 5: return t_rat(0);  // seeds division-by-zero cases
        case 6: {
            std::uniform_int_distribution<std::int64_t> n(-12, 12), d(1, 9);
            return t_rat(n(rng_), d(rng_));
        }
        default: {
            if (rational_) {
                std::uniform_int_distribution<std::int64_t> n(-99, 99), d(1, 40);
                return t_rat(n(rng_), d(rng_));
            }
            std::uniform_real_distribution<double> v(-4.0, 4.0);
            return t_num(v(rng_));
        }
    }
}

TermPtr TermGen::term(int depth) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (!pool_.empty() && u(rng_) < 0.2) {
        std::uniform_int_distribution<std::size_t> at(0, pool_.size() - 1);
        return pool_[at(rng_)];
    }

    TermPtr t;
    if (depth <= 0 || u(rng_) < 0.25) {
        t = leaf();
    } else {
        static const Fn binary[] = {Fn::add, Fn::sub, Fn::mul, Fn::div,
                                    Fn::mod, Fn::less};
        static const Fn unary[] = {Fn::neg, Fn::abs, Fn::sin,
                                   Fn::cos, Fn::exp, Fn::sqrt};
        std::uniform_int_distribution<int> shape(0, 9);
        int s = shape(rng_);
        if (s < 4) {
            std::uniform_int_distribution<int> at(0, std::size(binary) - 1);
            t = make_app(binary[at(rng_)], {term(depth - 1), term(depth - 1)});
        } else if (s < 7) {
            std::uniform_int_distribution<int> at(0, std::size(unary) - 1);
            t = make_app(unary[at(rng_)], {term(depth - 1)});
        } else if (s < 9) {
            t = t_if(term(depth - 1), term(depth - 1), term(depth - 1));
        } else {
            std::uniform_int_distribution<int> which(0, 3);
            std::uniform_int_distribution<std::int64_t> k(-2, 30);
            static const char* sig[] = {"a", "b", "c"};
            std::uniform_int_distribution<int> at(0, 2);
            if (which(rng_) == 0)
                t = t_prev(sig[at(rng_)]);
            else
                t = t_time_less(Rational(k(rng_), 10));
        }
    }
    pool_.push_back(t);
    return t;
}

const char* const kRcNative = R"((defconst *rc-netlist*
  '((rc-module
     nil
     ((v1 v (vs1 gnd) (i-v1)
          ((if ($time$< '1/5) '0 '1)))
      (r1 r (vs1 vc1) (i-r1) ('1))
      (c1 c (vc1 gnd) (i-c1) ('1))))))
)";

const char* const kRcSpice = R"(rc lowpass
v1 vs1 0 pulse(0 1 0.2 0 0 40)
r1 vs1 vc1 1
c1 vc1 0 1
.tran 0.2 2
.print tran v(vc1)
.end
)";

const char* const kRcHierNative = R"(((top nil
  ((v1 v (vs1 gnd) (i-v1)
       ((if ($time$< '1/5) '0 '1)))
   (x1 stage (vs1))))
 (stage (in)
  ((r1 r (in vc1) (i-r1) ('1))
   (c1 c (vc1 gnd) (i-c1) ('1)))))
)";

const GoldenRow kRcGolden[7] = {
    {"$TIME$", {0.00, 0.20, 0.40, 0.60, 0.80, 1.00, 1.20, 1.40, 1.60, 1.80}},
    {"$HN$", {0.00, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20, 0.20}},
    {"I-V1", {0.00, -0.91, -0.74, -0.61, -0.50, -0.41, -0.33, -0.27, -0.22, -0.18}},
    {"I-C1", {0.00, 0.91, 0.74, 0.61, 0.50, 0.41, 0.33, 0.27, 0.22, 0.18}},
    {"GND", {0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00}},
    {"VS1", {0.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00}},
    {"VC1", {0.00, 0.09, 0.26, 0.39, 0.50, 0.59, 0.67, 0.73, 0.78, 0.82}},
};

std::string ladder_native(int sections) {
    std::string out = "((ladder nil\n";
    out += "  ((v1 v (n0 gnd) (i-v1) ((if ($time$< '1/100) '0 '1)))\n";
    for (int k = 1; k <= sections; ++k) {
        std::string prev = "n" + std::to_string(k - 1);
        std::string cur = "n" + std::to_string(k);
        std::string i = std::to_string(k);
        out += "   (r" + i + " r (" + prev + " " + cur + ") (i-r" + i + ") ('1))\n";
        out += "   (c" + i + " c (" + cur + " gnd) (i-c" + i + ") ('1/1000))\n";
    }
    out += ")))\n";
    return out;
}

}  // namespace vwsim::test
