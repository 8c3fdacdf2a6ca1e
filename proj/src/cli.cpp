#include "mtlc/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mtlc/dfcheck.hpp"
#include "mtlc/error.hpp"
#include "mtlc/runtime.hpp"
#include "mtlc/stdlib.hpp"
#include "mtlc/syntax.hpp"
#include "mtlc/typecheck.hpp"

namespace mtlc {

namespace {

constexpr int kIoError = 5;

struct Options {
    std::string file;
    std::uint64_t seed = 0;
    std::string policy = "random";
    std::size_t steps = 1'000'000;
    bool trace = false;
    bool monitor_df = false;
    bool monitor_types = false;
    bool monitor_all = false;
    bool allow_create2 = false;
    std::vector<std::string> demo_args;
};

std::optional<std::string> read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string join(const std::vector<std::size_t> &xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
    return out;
}

std::string trace_line(const TraceEvent &ev) {
    std::vector<std::size_t> tids(ev.tids.begin(), ev.tids.end());
    std::vector<std::size_t> chans(ev.channels.begin(), ev.channels.end());
    return fmt::format("step={} rule={} tids={} chan={} note={}", ev.step, rule_tag(ev.rule), join(tids),
                       chans.empty() ? "-" : join(chans), ev.note);
}

// Parses and typechecks; prints diagnostics and returns nullopt on failure.
std::optional<Program> load(const std::string &source, const std::string &file, const Signature &sig,
                            std::ostream &err) {
    std::vector<Diagnostic> diags;
    Program p;
    try {
        p = parse_program(source);
        diags = check_program(p, sig);
    } catch (const Error &e) {
        diags.push_back(e.diagnostic());
    }
    for (const auto &d : diags) err << format_diagnostic(d, file) << "\n";
    if (!diags.empty()) return std::nullopt;
    return p;
}

RunConfig run_config(const Options &o, bool monitors_default) {
    RunConfig cfg;
    cfg.seed = o.seed;
    cfg.step_limit = o.steps;
    cfg.policy = o.policy == "rr" ? Policy::RoundRobin : o.policy == "adversarial" ? Policy::Adversarial : Policy::Random;
    bool all = o.monitor_all || monitors_default;
    cfg.monitors.types = all || o.monitor_types;
    cfg.monitors.df = all || o.monitor_df;
    cfg.monitors.canonical = all;
    cfg.allow_create2 = o.allow_create2;
    cfg.observe_only = o.allow_create2;
    return cfg;
}

int execute(const Program &p, RunConfig cfg, bool trace, std::ostream &out,
            const std::function<void(const Outcome &)> &on_final = {}) {
    if (trace) cfg.on_event = [&](const TraceEvent &ev) { out << trace_line(ev) << "\n"; };
    Outcome o = run_program(p, cfg);
    for (const auto &f : o.findings)
        out << fmt::format("monitor={} step={} detail={}\n", f.monitor, f.step, f.detail);
    switch (o.kind) {
    case OutcomeKind::Final:
        if (on_final)
            on_final(o);
        else
            out << "value=" << print_expr(o.value) << (o.residual ? " residual" : "") << "\n";
        break;
    case OutcomeKind::Deadlock:
        for (const auto &w : o.witness) out << "witness " << w << "\n";
        break;
    case OutcomeKind::MonitorViolation: out << "detail=" << o.detail << "\n"; break;
    case OutcomeKind::StepLimit: break;
    }
    out << "steps=" << o.steps << "\n";
    out << "outcome=" << to_string(o.kind) << "\n";
    return exit_code(o.kind);
}

int cmd_check(const Options &o, std::ostream &out, std::ostream &err) {
    auto src = read_file(o.file);
    if (!src) {
        err << "error: cannot read " << o.file << "\n";
        return kIoError;
    }
    Signature sig = Signature::builtin(o.allow_create2);
    auto p = load(*src, o.file, sig, err);
    if (!p) return 1;
    out << "ok " << o.file << " main : " << print_type(main_type(*p, sig)) << "\n";
    return 0;
}

int cmd_run(const Options &o, std::ostream &out, std::ostream &err) {
    auto src = read_file(o.file);
    if (!src) {
        err << "error: cannot read " << o.file << "\n";
        return kIoError;
    }
    auto p = load(*src, o.file, Signature::builtin(o.allow_create2), err);
    if (!p) return 1;
    return execute(*p, run_config(o, false), o.trace, out);
}

int cmd_df_check(const Options &o, std::ostream &out, std::ostream &err) {
    auto src = read_file(o.file);
    if (!src) {
        err << "error: cannot read " << o.file << "\n";
        return kIoError;
    }
    Collection m;
    try {
        m = parse_collection(*src);
    } catch (const std::invalid_argument &e) {
        err << "error " << o.file << ": " << e.what() << "\n";
        return kIoError;
    }
    std::string why;
    if (!is_regular(m, &why)) {
        out << "non-reducible\nnote: " << why << "\n";
        return 1;
    }
    DFVerdict v = is_df_reducible(m);
    out << (v.reducible ? "reducible" : "non-reducible") << "\n";
    for (const auto &s : v.trace) out << fmt::format("reduce via {} merging sets {} and {}\n", s.id, s.left, s.right);
    if (!v.reducible) out << v.witness() << "\n";
    return v.reducible ? 0 : 1;
}

int cmd_demo(const Options &o, std::ostream &out, std::ostream &err) {
    if (o.demo_args.empty()) {
        err << "error: demo needs a program name\n";
        return kIoError;
    }
    const std::string &name = o.demo_args[0];
    std::optional<std::string> src;
    std::function<void(const Outcome &)> on_final;
    auto print_list = [&](const Outcome &r) {
        auto xs = stdlib::int_list(r.value);
        if (!xs) {
            out << "value=" << print_expr(r.value) << "\n";
            return;
        }
        for (std::size_t i = 0; i < xs->size(); ++i) out << (i ? " " : "") << (*xs)[i];
        out << "\n";
    };
    try {
        if (name == "sieve" && o.demo_args.size() > 1) {
            int n = std::stoi(o.demo_args[1]);
            if (n < 1) throw std::invalid_argument("count");
            src = stdlib::sieve_source(n);
            on_final = print_list;
        } else if (name == "queue" && o.demo_args.size() > 1) {
            auto ops = stdlib::random_queue_script(std::stoul(o.demo_args[1]), o.seed);
            src = stdlib::queue_source(ops);
            on_final = print_list;
        } else {
            src = stdlib::corpus_source(name);
        }
    } catch (const std::exception &) {
        err << "error: bad demo arguments\n";
        return kIoError;
    }
    if (!src) {
        err << "error: no corpus program named " << name << "\n";
        return kIoError;
    }
    Options opts = o;
    if (name == stdlib::kCounterexample) opts.allow_create2 = true;
    auto p = load(*src, name, Signature::builtin(opts.allow_create2), err);
    if (!p) return 1;
    return execute(*p, run_config(opts, true), o.trace, out, on_final);
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Interpreter, session type checker and deadlock-freedom analysis for a linear lambda calculus "
                 "with channels"};
    app.require_subcommand(1);
    Options o;

    auto add_run_flags = [&](CLI::App *cmd) {
        cmd->add_option("--seed", o.seed, "Scheduler seed");
        cmd->add_option("--policy", o.policy, "random, rr or adversarial")
            ->check(CLI::IsMember({"random", "rr", "adversarial"}));
        cmd->add_option("--steps", o.steps, "Step limit")->check(CLI::PositiveNumber);
        cmd->add_flag("--trace", o.trace, "Print one line per step");
        cmd->add_flag("--monitor-df", o.monitor_df, "Check channel sets after every step");
        cmd->add_flag("--monitor-types", o.monitor_types, "Re-typecheck the pool after every step");
        cmd->add_flag("--monitor-all", o.monitor_all, "All monitors, including canonical forms");
        cmd->add_flag("--allow-create2", o.allow_create2, "Admit chneg_create2");
    };

    auto *check = app.add_subcommand("check", "Typecheck a program");
    check->add_option("file", o.file)->required();
    check->add_flag("--allow-create2", o.allow_create2, "Admit chneg_create2");

    auto *run = app.add_subcommand("run", "Run a program");
    run->add_option("file", o.file)->required();
    add_run_flags(run);

    auto *df = app.add_subcommand("df-check", "Decide DF-reducibility of a collection of channel sets");
    df->add_option("file", o.file)->required();

    auto *demo = app.add_subcommand("demo", "Run a corpus program with monitors on (sieve N, queue N, or a name)");
    demo->add_option("args", o.demo_args)->required();
    add_run_flags(demo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        std::ostringstream o_out, o_err;
        int code = app.exit(e, o_out, o_err);
        out << o_out.str();
        err << o_err.str();
        return code == 0 ? 0 : kIoError;
    }

    if (check->parsed()) return cmd_check(o, out, err);
    if (run->parsed()) return cmd_run(o, out, err);
    if (df->parsed()) return cmd_df_check(o, out, err);
    return cmd_demo(o, out, err);
}

}  // namespace mtlc
