#pragma once

// ocflab command-line front end. run() is separate from main() so tests can drive it.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocf/ocf.hpp"
#include "ocf/suites.hpp"

namespace ocflab {

using ocf::Errc;
using ocf::Error;
using ocf::Quadratic;
using json = nlohmann::ordered_json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_parse = 2;
inline constexpr int exit_precondition = 3;
inline constexpr int exit_budget = 4;

inline int exit_code_for(Errc code)
{
    switch (code) {
    case Errc::parse_error:
    case Errc::invalid_denominator:
    case Errc::unsupported_field: return exit_parse;
    case Errc::period_not_found:
    case Errc::budget_exceeded: return exit_budget;
    default: return exit_precondition;
    }
}

inline void diagnose(std::ostream& err, const std::string& code, const std::string& message)
{
    err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

struct Options {
    std::string cf = "ocf";
    std::string value;
    std::string matrix;
    int e = 1;
    std::string set;
    std::string suite;
    std::string method = "triples";
    std::string N_text, R_text;
    std::string alpha = "1", beta, beta1 = "G+1", beta2 = "G-1";
    std::string K = "1";
    int r = 1;
    std::string out;
    std::string format = "csv";
    unsigned partitions = 1;
    std::uint64_t seed = 20240601;
    std::size_t max_steps = ocf::default_max_steps;
    bool with_main_term = false;
    bool progress = false;
    std::string checkpoint;
    std::string dump_marginals;
};

/// Output sink: --out path or the given stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw Error(Errc::precondition, "cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& get() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

inline std::int64_t trace_bound(const Options& o)
{
    if (!o.N_text.empty() && !o.R_text.empty())
        throw Error(Errc::precondition, "give either --N or --R, not both");
    if (!o.R_text.empty()) {
        double R = 0;
        try {
            std::size_t pos = 0;
            R = std::stod(o.R_text, &pos);
            if (pos != o.R_text.size())
                throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw Error(Errc::parse_error, "cannot parse --R '" + o.R_text + "'");
        }
        return ocf::trace_bound_from_length(R);
    }
    if (o.N_text.empty())
        throw Error(Errc::precondition, "--N (or --R) is required");
    try {
        std::size_t pos = 0;
        const long long N = std::stoll(o.N_text, &pos);
        if (pos != o.N_text.size())
            throw std::invalid_argument("junk");
        if (N < 1)
            throw Error(Errc::precondition, "--N must be positive");
        return N;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(Errc::parse_error, "cannot parse --N '" + o.N_text + "'");
    }
}

inline ocf::TableFormat table_format(const std::string& f)
{
    if (f == "csv")
        return ocf::TableFormat::csv;
    if (f == "tsv")
        return ocf::TableFormat::tsv;
    if (f == "json")
        return ocf::TableFormat::json;
    throw Error(Errc::parse_error, "unknown format '" + f + "'");
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_expand(const Options& o, std::ostream& out)
{
    const Quadratic x = ocf::parse_quadratic(o.value);
    ocf::ExpansionResult r;
    if (o.cf == "ocf")
        r = ocf::ocf_expand(x, o.max_steps);
    else if (o.cf == "rcf")
        r = ocf::rcf_expand(x, o.max_steps);
    else if (o.cf == "grotesque")
        r = ocf::grotesque_expand(x, o.max_steps);
    else
        throw Error(Errc::parse_error, "unknown --cf '" + o.cf + "'");
    json j;
    j["cf"] = o.cf;
    j["value"] = ocf::to_string(x);
    j["preperiod"] = ocf::to_string(r.preperiod);
    j["period"] = ocf::to_string(r.period);
    j["purely_periodic"] = r.purely_periodic;
    out << j.dump() << '\n';
    return exit_ok;
}

inline int cmd_classify(const Options& o, std::ostream& out)
{
    const Quadratic x = ocf::parse_quadratic(o.value);
    const ocf::ReducedFlags f = ocf::classify_reduced(x);
    json j;
    j["value"] = ocf::to_string(x);
    j["flags"] = ocf::to_string(f);
    j["R"] = f.R;
    j["E"] = f.E;
    j["O"] = f.O;
    j["B"] = f.B;
    out << j.dump() << '\n';
    return exit_ok;
}

inline int cmd_factor(const Options& o, std::ostream& out)
{
    const ocf::Mat2 m = ocf::parse_mat2(o.matrix);
    if (o.e != 1 && o.e != -1)
        throw Error(Errc::precondition, "--e must be 1 or -1");
    const ocf::Mat2 base = o.e == 1 ? m : ocf::Mat2{m.a, -m.b, m.c, -m.d};
    if (!ocf::in_S_e(m, o.e))
        throw Error(Errc::not_in_set, "matrix " + ocf::to_string(m) + " is not in S_e for e = " + std::to_string(o.e));
    const auto blocks = ocf::factor_matrix(base);
    json j;
    j["matrix"] = ocf::to_string(m);
    j["e"] = o.e;
    auto& arr = j["blocks"] = json::array();
    for (const auto& b : blocks)
        arr.push_back(ocf::to_string(b));
    j["word"] = ocf::to_string(ocf::word_from_matrix(m, o.e));
    out << j.dump() << '\n';
    return exit_ok;
}

inline void write_records(std::ostream& os, const std::vector<ocf::QiRecord>& recs, ocf::TableFormat fmt, bool& first)
{
    for (const auto& r : recs) {
        if (fmt == ocf::TableFormat::json && !first)
            os << ",\n";
        ocf::write_record(os, r, fmt);
        if (fmt != ocf::TableFormat::json)
            os << '\n';
        first = false;
    }
}

inline std::vector<ocf::QiRecord> read_chunk(const std::filesystem::path& path, bool& ok)
{
    // Chunks store periods only; records are rebuilt from the words.
    std::ifstream in(path);
    std::vector<ocf::QiRecord> recs;
    std::string line;
    ok = false;
    while (std::getline(in, line)) {
        if (line == "#complete") {
            ok = true;
            break;
        }
        const ocf::Word w = ocf::parse_word(line);
        const ocf::OmegaTilde info = ocf::omega_tilde_info(w);
        ocf::QiRecord r;
        r.period = w;
        r.omega = ocf::periodic_value(w);
        r.omega_star = r.omega.conjugate();
        r.trace = ocf::to_int64(info.omega_tilde.trace());
        r.length_o = ocf::length_from_trace(r.trace);
        r.sign_product = info.sign_product;
        recs.push_back(std::move(r));
    }
    return recs;
}

inline int cmd_enumerate(const Options& o, std::ostream& out, std::ostream& err)
{
    const ocf::EnumParams p = [&] {
        ocf::EnumParams q;
        q.N = trace_bound(o);
        // window only when asked for; the defaults describe the full domain anyway
        if (o.alpha != "1")
            q.alpha = ocf::parse_param(o.alpha);
        if (o.beta1 != "G+1")
            q.beta1 = ocf::parse_param(o.beta1);
        if (o.beta2 != "G-1")
            q.beta2 = ocf::parse_param(o.beta2);
        q.validate();
        return q;
    }();
    const ocf::TableFormat fmt = table_format(o.format);
    Sink sink(o.out, out);
    std::ostream& os = sink.get();
    if (fmt == ocf::TableFormat::csv)
        os << ocf::record_header() << '\n';
    else if (fmt == ocf::TableFormat::tsv) {
        std::string h = ocf::record_header();
        std::replace(h.begin(), h.end(), ',', '\t');
        os << h << '\n';
    } else
        os << "[\n";
    bool first = true;
    const auto roots = ocf::root_digits(p.N);
    if (o.checkpoint.empty()) {
        std::vector<std::vector<ocf::QiRecord>> chunks(roots.size());
        std::atomic<std::size_t> done{0};
        std::mutex err_mutex;
        ocf::run_partitioned(roots.size(), o.partitions, [&](std::size_t i) {
            chunks[i] = ocf::enumerate_root(p, roots[i]);
            const std::size_t d = ++done;
            if (o.progress && (d % 64 == 0 || d == roots.size())) {
                const std::lock_guard<std::mutex> lock(err_mutex);
                err << json{{"progress", d}, {"of", roots.size()}}.dump() << '\n';
            }
        });
        for (const auto& c : chunks)
            write_records(os, c, fmt, first);
    } else {
        namespace fs = std::filesystem;
        const fs::path dir(o.checkpoint);
        fs::create_directories(dir);
        // Chunk files are keyed by N, window and root digit, so a resumed run only redoes missing roots.
        std::ostringstream key;
        key << "N" << p.N << "_" << std::hash<std::string>{}(o.alpha + "|" + o.beta1 + "|" + o.beta2);
        auto chunk_path = [&](std::size_t i) {
            return dir / (key.str() + "_root_" + std::to_string(roots[i].a) + (roots[i].e > 0 ? "p" : "m") + ".txt");
        };
        ocf::run_partitioned(roots.size(), o.partitions, [&](std::size_t i) {
            const fs::path path = chunk_path(i);
            bool ok = false;
            if (fs::exists(path))
                read_chunk(path, ok);
            if (ok)
                return;
            const auto recs = ocf::enumerate_root(p, roots[i]);
            const fs::path tmp = path.string() + ".part";
            {
                std::ofstream f(tmp);
                for (const auto& r : recs)
                    f << ocf::to_string(r.period) << '\n';
                f << "#complete\n";
            }
            fs::rename(tmp, path);
        });
        for (std::size_t i = 0; i < roots.size(); ++i) {
            bool ok = false;
            const auto recs = read_chunk(chunk_path(i), ok);
            if (!ok)
                throw Error(Errc::precondition, "incomplete checkpoint chunk " + chunk_path(i).string());
            write_records(os, recs, fmt, first);
        }
    }
    if (fmt == ocf::TableFormat::json)
        os << "\n]\n";
    return exit_ok;
}

inline json main_term_report(const std::string& selector, const json& params, std::int64_t exact, double main, double N)
{
    json j;
    j["selector"] = selector;
    j["params"] = params;
    j["exact"] = exact;
    j["main_term"] = main;
    j["residual"] = static_cast<double>(exact) - main;
    j["normalized_residual"] = (static_cast<double>(exact) - main) / std::pow(N, 1.5);
    return j;
}

inline int cmd_count(const Options& o, std::ostream& out)
{
    const std::int64_t N = trace_bound(o);
    const double Nd = static_cast<double>(N);
    const ocf::Budget budget = ocf::Budget::from_env();
    const Quadratic alpha = ocf::parse_param(o.alpha);
    json params{{"N", N}, {"alpha", ocf::to_string(alpha)}};
    json report;
    if (o.set == "S+1" || o.set == "S-1" || o.set == "A1" || o.set == "A2" || o.set == "A3") {
        const int e = o.set == "S+1" ? 1 : o.set == "S-1" ? -1 : o.e;
        if (e != 1 && e != -1)
            throw Error(Errc::precondition, "--e must be 1 or -1");
        const std::string beta_text = !o.beta.empty() ? o.beta : (e == 1 ? "g" : "G+1");
        const Quadratic beta = ocf::parse_param(beta_text);
        params["e"] = e;
        params["beta"] = ocf::to_string(beta);
        if (o.method != "triples" && o.method != "brute" && o.method != "both")
            throw Error(Errc::parse_error, "unknown --method '" + o.method + "'");
        const ocf::TripleCount tri = ocf::count_S_triples(e, alpha, beta, N);
        std::int64_t exact = tri.total();
        std::optional<std::int64_t> brute;
        if (o.method != "triples" && o.set[0] == 'S') {
            brute = ocf::count_S_brute(e, alpha, beta, N, budget);
            if (o.method == "brute")
                exact = *brute;
        }
        std::string selector;
        if (o.set[0] == 'A') {
            const int which = o.set[1] - '0';
            exact = which == 1 ? tri.A1 : which == 2 ? tri.A2 : tri.A3;
            selector = e == 1 ? "A+1" : "A-1";
        } else {
            selector = o.set;
        }
        const double main =
            ocf::main_term(selector, {Nd, alpha.to_double(), ocf::effective_beta(e, beta).to_double()});
        report = main_term_report(o.set, params, exact, main, Nd);
        if (!o.with_main_term) {
            report.erase("main_term");
            report.erase("residual");
            report.erase("normalized_residual");
        }
        report["breakdown"] = {{"A1", tri.A1}, {"A2", tri.A2}, {"A3", tri.A3}, {"exceptions", tri.exceptions}};
        if (brute)
            report["brute"] = *brute;
        if (brute && *brute != tri.total())
            throw Error(Errc::precondition, "brute and triple counts disagree");
    } else if (o.set == "W") {
        ocf::EnumParams p;
        p.N = N;
        p.alpha = alpha;
        p.beta1 = ocf::parse_param(o.beta1);
        p.beta2 = ocf::parse_param(o.beta2);
        p.validate();
        params["beta1"] = ocf::to_string(*p.beta1);
        params["beta2"] = ocf::to_string(*p.beta2);
        const ocf::WCount w = ocf::count_words_W(p, o.partitions);
        const double main =
            ocf::main_term("theorem", {Nd, alpha.to_double(), 1, p.beta1->to_double(), p.beta2->to_double()});
        report = main_term_report("W", params, w.total(), main, Nd);
        if (!o.with_main_term) {
            report.erase("main_term");
            report.erase("residual");
            report.erase("normalized_residual");
        }
        report["W_minus"] = w.minus;
        report["W_plus"] = w.plus;
    } else if (o.set == "ANr") {
        const Quadratic K = ocf::parse_param(o.K);
        params["r"] = o.r;
        params["K"] = ocf::to_string(K);
        const std::int64_t exact = ocf::count_A_Nr(o.r, K, N, budget);
        report["selector"] = "ANr";
        report["params"] = params;
        report["exact"] = exact;
        report["normalized"] = static_cast<double>(exact) / std::pow(Nd, 1.5);
    } else {
        throw Error(Errc::parse_error, "unknown --set '" + o.set + "'");
    }
    Sink sink(o.out, out);
    sink.get() << report.dump() << '\n';
    return exit_ok;
}

inline int cmd_verify(const Options& o, std::ostream& out)
{
    const std::int64_t N = o.N_text.empty() && o.R_text.empty() ? 0 : trace_bound(o);
    const ocf::SuiteResult r = ocf::run_suite(o.suite, N, o.seed);
    Sink sink(o.out, out);
    json j = ocf::to_json(r);
    j["seed"] = o.seed;
    sink.get() << j.dump() << '\n';
    return r.passed() ? exit_ok : exit_check_failed;
}

inline int cmd_equidist(const Options& o, std::ostream& out)
{
    ocf::EnumParams p;
    p.N = trace_bound(o);
    const Quadratic alpha = ocf::parse_param(o.alpha);
    const auto recs = ocf::enumerate_primitive(p, o.partitions);
    const ocf::Grid2D grid = ocf::Grid2D::standard();
    const ocf::DiscrepancyReport rep = ocf::empirical_report(recs, p.N, grid);
    const ocf::CorollaryRatio cr = ocf::corollary_ratio(recs, alpha);
    Sink sink(o.out, out);
    if (o.format == "csv") {
        ocf::write_csv(sink.get(), rep);
    } else if (o.format == "json") {
        json j = ocf::to_json(rep);
        j["corollary"] = {{"alpha", ocf::to_string(alpha)}, {"ratio", cr.ratio}, {"limit", cr.limit},
                          {"hits", cr.hits}, {"total", cr.total}};
        sink.get() << j.dump() << '\n';
    } else {
        throw Error(Errc::parse_error, "equidist supports --format json or csv");
    }
    if (!o.dump_marginals.empty()) {
        std::ofstream f(o.dump_marginals);
        if (!f)
            throw Error(Errc::precondition, "cannot open '" + o.dump_marginals + "'");
        ocf::write_marginal_dump(f, rep, grid);
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ocflab: odd continued fractions and O-reduced quadratic irrationals"};
    app.require_subcommand(1);
    Options o;

    auto add_bounds = [&](CLI::App* c) {
        c->add_option("--N", o.N_text, "trace bound");
        c->add_option("--R", o.R_text, "length bound, N = floor(exp(R/2))");
        c->add_option("--alpha", o.alpha, "omega >= alpha");
        c->add_option("--beta1", o.beta1, "omega* <= 1/beta1");
        c->add_option("--beta2", o.beta2, "omega* >= -1/beta2");
        c->add_option("--partitions", o.partitions, "worker threads")->check(CLI::PositiveNumber);
        c->add_option("--out", o.out, "output path");
    };

    auto* expand = app.add_subcommand("expand", "continued fraction of a value");
    expand->add_option("--cf", o.cf, "ocf | rcf | grotesque")->check(CLI::IsMember({"ocf", "rcf", "grotesque"}));
    expand->add_option("--value", o.value, "value, e.g. (1+1*sqrt(2))/1")->required();
    expand->add_option("--max-steps", o.max_steps, "step cap for period detection");

    auto* classify = app.add_subcommand("classify", "R/E/O/B reduction flags");
    classify->add_option("--value", o.value, "value")->required();

    auto* factor = app.add_subcommand("factor", "matrix to building blocks");
    factor->add_option("--matrix", o.matrix, "[[a,b],[c,d]]")->required();
    factor->add_option("--e", o.e, "sign of the set S_e")->check(CLI::IsMember({-1, 1}));

    auto* enumerate = app.add_subcommand("enumerate", "O-reduced values with Tr <= N");
    add_bounds(enumerate);
    enumerate->add_option("--format", o.format, "csv | tsv | json")->check(CLI::IsMember({"csv", "tsv", "json"}));
    enumerate->add_option("--checkpoint", o.checkpoint, "directory for resumable chunks");
    enumerate->add_flag("--progress", o.progress, "progress lines on stderr");
    enumerate->add_option("--seed", o.seed, "unused; accepted for uniform configs");

    auto* count = app.add_subcommand("count", "exact set counts with main terms");
    add_bounds(count);
    count->add_option("--set", o.set, "S+1 | S-1 | W | A1 | A2 | A3 | ANr")
        ->required()
        ->check(CLI::IsMember({"S+1", "S-1", "W", "A1", "A2", "A3", "ANr"}));
    count->add_option("--beta", o.beta, "a/b >= beta");
    count->add_option("--e", o.e, "sign for A1/A2/A3")->check(CLI::IsMember({-1, 1}));
    count->add_option("--method", o.method, "triples | brute | both");
    count->add_option("--r", o.r, "A_{N,r}: r in {1,2}")->check(CLI::IsMember({1, 2}));
    count->add_option("--K", o.K, "A_{N,r}: a <= K N");
    count->add_flag("--with-main-term", o.with_main_term, "report main term and residual");

    auto* verify = app.add_subcommand("verify", "self-check suites");
    verify->add_option("--suite", o.suite, "suite name")
        ->required()
        ->check(CLI::IsMember({"roundtrip", "appendix3", "trace-sandwich", "bijection", "reduction-chain", "kloosterman",
                               "totient", "measures"}));
    verify->add_option("--N", o.N_text, "size parameter");
    verify->add_option("--seed", o.seed, "corpus seed");
    verify->add_option("--out", o.out, "output path");

    auto* equidist = app.add_subcommand("equidist", "empirical distribution report");
    add_bounds(equidist);
    equidist->add_option("--format", o.format, "json | csv");
    equidist->add_option("--dump-marginals", o.dump_marginals, "two-column marginal dump path");
    equidist->add_option("--seed", o.seed, "unused; accepted for uniform configs");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        diagnose(err, "parse_error", e.what());
        return exit_parse;
    }
    if (equidist->parsed() && o.format == "csv" && app.get_subcommand("equidist")->count("--format") == 0)
        o.format = "json";

    try {
        if (expand->parsed())
            return cmd_expand(o, out);
        if (classify->parsed())
            return cmd_classify(o, out);
        if (factor->parsed())
            return cmd_factor(o, out);
        if (enumerate->parsed())
            return cmd_enumerate(o, out, err);
        if (count->parsed())
            return cmd_count(o, out);
        if (verify->parsed())
            return cmd_verify(o, out);
        if (equidist->parsed())
            return cmd_equidist(o, out);
    } catch (const Error& e) {
        diagnose(err, ocf::to_string(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        diagnose(err, "internal", e.what());
        return exit_precondition;
    }
    return exit_parse;
}

}  // namespace ocflab
