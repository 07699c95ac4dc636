#include "equistab/symgroup.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace equistab {

// ---------------------------------------------------------------- Fraction

Fraction::Fraction(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::runtime_error("Fraction: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
}

Fraction Fraction::mod1(std::int64_t n, std::int64_t d) {
    Fraction f(n, d);
    f.num %= f.den;
    if (f.num < 0) f.num += f.den;
    if (f.num == 0) f.den = 1;
    return f;
}

Fraction Fraction::plus_mod1(const Fraction& other) const {
    return mod1(num * other.den + other.num * den, den * other.den);
}

Fraction Fraction::neg_mod1() const { return mod1(-num, den); }

std::string Fraction::str() const {
    if (num == 0) return "0";
    return std::to_string(num) + "/" + std::to_string(den);
}

// -------------------------------------------------------------------- Perm

Perm Perm::from_cycles(const std::string& text) {
    Perm p;
    std::array<bool, 8> seen{};
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    skip_ws();
    while (i < text.size()) {
        if (text[i] != '(')
            throw std::runtime_error("Perm: expected '(' in \"" + text + "\"");
        ++i;
        std::vector<int> cyc;
        while (i < text.size() && text[i] != ')') {
            const char c = text[i];
            if (c < '1' || c > '8')
                throw std::runtime_error("Perm: bad symbol in \"" + text + "\"");
            cyc.push_back(c - '1');
            ++i;
        }
        if (i == text.size())
            throw std::runtime_error("Perm: unterminated cycle in \"" + text + "\"");
        ++i;  // ')'
        for (std::size_t k = 0; k < cyc.size(); ++k) {
            const int from = cyc[k];
            const int to = cyc[(k + 1) % cyc.size()];
            if (seen[from])
                throw std::runtime_error("Perm: repeated symbol in \"" + text + "\"");
            seen[from] = true;
            p.img[from] = static_cast<std::uint8_t>(to);
        }
        skip_ws();
    }
    // validate bijection
    std::array<bool, 8> hit{};
    for (int j = 0; j < 8; ++j) hit[p.img[j]] = true;
    for (int j = 0; j < 8; ++j)
        if (!hit[j]) throw std::runtime_error("Perm: not a bijection in \"" + text + "\"");
    return p;
}

std::string Perm::cycles() const {
    std::array<bool, 8> done{};
    std::string out;
    for (int j = 0; j < 8; ++j) {
        if (done[j] || img[j] == j) { done[j] = true; continue; }
        out += '(';
        int k = j;
        do {
            done[k] = true;
            out += static_cast<char>('1' + k);
            k = img[k];
        } while (k != j);
        out += ')';
    }
    if (out.empty()) out = "()";
    return out;
}

Perm Perm::compose(const Perm& rhs) const {
    Perm p;
    for (int j = 0; j < 8; ++j) p.img[j] = img[rhs.img[j]];
    return p;
}

Perm Perm::inverse() const {
    Perm p;
    for (int j = 0; j < 8; ++j) p.img[img[j]] = static_cast<std::uint8_t>(j);
    return p;
}

bool Perm::is_identity() const {
    for (int j = 0; j < 8; ++j)
        if (img[j] != j) return false;
    return true;
}

Matrix8 permutation_matrix(const Perm& g) {
    Matrix8 m = Matrix8::Zero();
    for (int j = 0; j < 8; ++j) m(g.img[j], j) = 1.0;
    return m;
}

// ------------------------------------------------------------ GroupElement

GroupElement GroupElement::product(const GroupElement& other) const {
    return GroupElement{sign * other.sign, perm.compose(other.perm),
                        phase.plus_mod1(other.phase)};
}

GroupElement GroupElement::inverse() const {
    return GroupElement{sign, perm.inverse(), phase.neg_mod1()};
}

bool GroupElement::is_identity() const {
    return sign == 1 && perm.is_identity() && phase.is_zero();
}

Matrix8 GroupElement::matrix() const {
    return static_cast<double>(sign) * permutation_matrix(perm);
}

std::string GroupElement::str() const {
    return std::string("(") + (sign > 0 ? "+1," : "-1,") + perm.cycles() + "," +
           phase.str() + ")";
}

// ---------------------------------------------------------------- SymGroup

SymGroup SymGroup::from_elements(std::vector<GroupElement> els, std::string name) {
    std::sort(els.begin(), els.end());
    els.erase(std::unique(els.begin(), els.end()), els.end());
    if (els.empty()) throw std::runtime_error("SymGroup: empty element set");

    SymGroup g{std::move(els), std::move(name)};
    const std::string tag = g.name.empty() ? "<unnamed>" : g.name;

    if (!g.contains(GroupElement{}))
        throw std::runtime_error("SymGroup " + tag + ": missing identity");
    for (const auto& x : g.elements) {
        if (x.sign != 1 && x.sign != -1)
            throw std::runtime_error("SymGroup " + tag + ": bad sign");
        if (!g.contains(x.inverse()))
            throw std::runtime_error("SymGroup " + tag + ": not closed under inverse (" +
                                     x.str() + ")");
        // phase must be determined by the spatial part
        for (const auto& y : g.elements)
            if (y.sign == x.sign && y.perm == x.perm && !(y.phase == x.phase))
                throw std::runtime_error("SymGroup " + tag +
                                         ": phase not a function of (sign, perm)");
    }
    for (const auto& x : g.elements)
        for (const auto& y : g.elements)
            if (!g.contains(x.product(y)))
                throw std::runtime_error("SymGroup " + tag + ": not closed, " + x.str() +
                                         " * " + y.str() + " missing");
    return g;
}

bool SymGroup::contains(const GroupElement& g) const {
    return std::binary_search(elements.begin(), elements.end(), g);
}

// ------------------------------------------------------------- derived data

SymGroup product_group(const SymGroup& h, const SymGroup& k) {
    std::vector<GroupElement> out;
    out.reserve(h.size() * k.size());
    for (const auto& x : h.elements)
        for (const auto& y : k.elements) out.push_back(x.product(y));
    std::string name;
    if (!h.name.empty() && !k.name.empty()) name = h.name + "*" + k.name;
    return SymGroup::from_elements(std::move(out), std::move(name));
}

SymGroup kernel(const SymGroup& h) {
    std::vector<GroupElement> out;
    for (const auto& x : h.elements)
        if (x.phase.is_zero()) out.push_back(x);
    return SymGroup::from_elements(std::move(out),
                                   h.name.empty() ? std::string{} : "0" + h.name);
}

Fraction t_zero(const SymGroup& h) {
    bool found = false;
    Fraction best;
    for (const auto& x : h.elements) {
        if (x.phase.is_zero()) continue;
        if (!found || x.phase < best) { best = x.phase; found = true; }
    }
    if (!found)
        throw std::runtime_error("t_zero: temporal part trivial in group " +
                                 (h.name.empty() ? std::string("<unnamed>") : h.name));
    return best;
}

std::vector<GroupElement> level_set(const SymGroup& h) {
    const Fraction t0 = t_zero(h);
    std::vector<GroupElement> out;
    for (const auto& x : h.elements)
        if (x.phase == t0) out.push_back(x);
    return out;
}

Eigen::MatrixXd fixed_subspace(const std::vector<GroupElement>& s) {
    if (s.empty()) throw std::runtime_error("fixed_subspace: empty element set");
    Eigen::MatrixXd stacked(8 * static_cast<int>(s.size()), 8);
    for (std::size_t k = 0; k < s.size(); ++k)
        stacked.block<8, 8>(8 * static_cast<int>(k), 0) = s[k].matrix() - Matrix8::Identity();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10) ++rank;
    return svd.matrixV().rightCols(8 - rank);
}

// ---------------------------------------------------------------- data files

std::string data_dir() {
    if (const char* env = std::getenv("EQUISTAB_DATA_DIR"); env && *env) return env;
#ifdef EQUISTAB_DATA_DIR_DEFAULT
    return EQUISTAB_DATA_DIR_DEFAULT;
#else
    return "data/groups";
#endif
}

GroupElement parse_element_line(const std::string& line) {
    std::istringstream in(line);
    std::string sign_tok, perm_tok, phase_tok;
    if (!(in >> sign_tok >> perm_tok >> phase_tok))
        throw std::runtime_error("group data: malformed line \"" + line + "\"");
    int sign;
    if (sign_tok == "+1" || sign_tok == "1") sign = 1;
    else if (sign_tok == "-1") sign = -1;
    else throw std::runtime_error("group data: bad sign \"" + sign_tok + "\"");
    Perm p = Perm::from_cycles(perm_tok);
    std::int64_t n = 0, d = 1;
    if (const auto slash = phase_tok.find('/'); slash != std::string::npos) {
        n = std::stoll(phase_tok.substr(0, slash));
        d = std::stoll(phase_tok.substr(slash + 1));
    } else {
        n = std::stoll(phase_tok);
    }
    return GroupElement{sign, p, Fraction::mod1(n, d)};
}

SymGroup load_group_file(const std::string& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open group file " + path);
    std::vector<GroupElement> els;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || line[first] == '#') continue;
        els.push_back(parse_element_line(line));
    }
    return SymGroup::from_elements(std::move(els), std::move(name));
}

// --------------------------------------------------------------- registry

namespace {

const std::vector<std::string> kBaseLabels = {"S4", "D4z", "D3z", "D2d", "Z4c",
                                              "Z3t", "D4d", "D3",  "S4m"};

SymGroup load_named_uncached(const std::string& label) {
    std::string base = label;
    char deco = 0;
    if (!label.empty() && (label[0] == '+' || label[0] == '-')) {
        deco = label[0];
        base = label.substr(1);
    }
    if (std::find(kBaseLabels.begin(), kBaseLabels.end(), base) == kBaseLabels.end() &&
        base != "o" && base != "oz")
        throw std::runtime_error("unknown group label \"" + label + "\"");
    SymGroup h = load_group_file(data_dir() + "/" + base + ".txt", base);
    if (!deco) return h;
    // +H = H x (Z2xO1)^o, -H = H x (Z2xO1)^oz
    SymGroup deco_grp = load_group_file(
        data_dir() + std::string(deco == '+' ? "/o.txt" : "/oz.txt"));
    SymGroup g = product_group(h, deco_grp);
    g.name = label;
    return g;
}

}  // namespace

std::vector<std::string> named_group_labels() {
    std::vector<std::string> out;
    for (const auto& b : kBaseLabels) {
        out.push_back(b);
        out.push_back("+" + b);
        out.push_back("-" + b);
    }
    return out;
}

SymGroup named_group(const std::string& label) {
    static std::map<std::string, SymGroup> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(label);
    if (it == cache.end()) it = cache.emplace(label, load_named_uncached(label)).first;
    return it->second;
}

}  // namespace equistab
