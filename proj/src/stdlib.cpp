#include "mtlc/stdlib.hpp"

#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "corpus_data.hpp"

namespace mtlc::stdlib {

Session times(const Session &a, const Session &b) { return s_snd(t_chneg(a), b); }
Session limplies(const Session &a, const Session &b) { return s_rcv(t_chneg(a), b); }
Session adisj(const Session &a, const Session &b) { return s_choice(ChoiceDir::SndTag, {{"l", a}, {"r", b}}); }
Session aconj(const Session &a, const Session &b) { return s_choice(ChoiceDir::RcvTag, {{"l", a}, {"r", b}}); }

std::optional<std::string> corpus_source(std::string_view name) {
    std::string key = std::string(name) + (name.ends_with(".txt") ? "" : ".mtl");
    for (const auto &[file, text] : detail::corpus_files())
        if (file == key) return std::string(text);
    return std::nullopt;
}

const std::vector<std::string> &corpus_programs() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto &[file, text] : detail::corpus_files()) {
            std::string_view f = file;
            if (f.find('/') != std::string_view::npos || !f.ends_with(".mtl")) continue;
            f.remove_suffix(4);
            if (f != kCounterexample) out.emplace_back(f);
        }
        return out;
    }();
    return names;
}

std::vector<RejectCase> reject_suite() {
    auto manifest = corpus_source("reject/manifest.txt");
    if (!manifest) throw std::runtime_error("reject manifest missing");
    std::vector<RejectCase> out;
    std::istringstream in(*manifest);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string file, code;
        fields >> file >> code;
        std::string stem = file.substr(0, file.rfind(".mtl"));
        auto src = corpus_source("reject/" + stem);
        if (!src) throw std::runtime_error("reject case missing: " + file);
        out.push_back({"reject/" + stem, *src, code});
    }
    return out;
}

namespace {

std::string without_main(const std::string &src) {
    auto pos = src.find("fun main()");
    if (pos == std::string::npos) throw std::logic_error("corpus program has no main");
    return src.substr(0, pos);
}

std::string nested_tuple(const std::vector<std::string> &names) {
    std::string out = "()";
    for (auto it = names.rbegin(); it != names.rend(); ++it) out = "(" + *it + ", " + out + ")";
    return out;
}

}  // namespace

std::string sieve_source(int n) {
    std::string out = without_main(*corpus_source("sieve"));
    out += "fun main() =\n  let s = sieve() in\n";
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) {
        names.push_back("p" + std::to_string(i));
        out += "  let (s, " + names.back() + ") = next(s) in\n";
    }
    out += "  channeg_close(select[nil](s));\n  " + nested_tuple(names) + "\n";
    return out;
}

std::optional<std::vector<std::int64_t>> int_list(const Expr &v) {
    std::vector<std::int64_t> out;
    Expr cur = v;
    while (const auto *p = as<ex::Pair>(cur)) {
        const auto *i = as<ex::Int>(p->first);
        if (!i) return std::nullopt;
        out.push_back(i->value);
        cur = p->second;
    }
    if (!as<ex::Unit>(cur)) return std::nullopt;
    return out;
}

std::vector<QueueOp> random_queue_script(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<QueueOp> ops;
    std::int64_t next = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (coin(rng))
            ops.push_back({true, next++});
        else
            ops.push_back({false, 0});
    }
    return ops;
}

std::string queue_source(const std::vector<QueueOp> &ops) {
    std::string out = without_main(*corpus_source("queue"));
    out += "fun main() =\n  let q = queue_create() in\n";
    std::vector<std::string> names;
    for (const auto &op : ops) {
        if (op.enq) {
            out += "  let q = enq(q, " + std::to_string(op.value) + ") in\n";
        } else {
            names.push_back("d" + std::to_string(names.size() + 1));
            out += "  let (q, " + names.back() + ") = deq(q) in\n";
        }
    }
    out += "  channeg_close(select[nil](q));\n  " + nested_tuple(names) + "\n";
    return out;
}

}  // namespace mtlc::stdlib
