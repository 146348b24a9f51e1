// Command-line front end: partition, run, table1, method-table, bench.
#include "fsse/attack_sim.hpp"
#include "fsse/linalg.hpp"
#include "fsse/tables.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace fsse;

namespace {

enum ExitCode : int {
    ok = 0,
    other_error = 1,
    parse_failure = 2,
    observability_violation = 3,
    estimator_exhaustion = 4,
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::string agreement;

    void apply(Scenario& s) const {
        if (seed) s.attack.seed = *seed;
        if (!mode.empty()) s.estimator = parse_estimator_mode(mode);
        if (!agreement.empty()) s.agreement = parse_agreement_mode(agreement);
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

std::string opt(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream s;
    s << std::setprecision(6) << *v;
    return s.str();
}

int cmd_partition(const std::string& scenario_path, const std::string& out_dir) {
    const Scenario scenario = load_scenario(scenario_path);
    const SystemModel model = scenario.model();
    const auto start = std::chrono::steady_clock::now();
    const ObservationStack stack = build_observation_stack(model);
    const Partition partition = de_partition(stack);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::cout << "scenario: " << scenario.name << "  (p=" << model.p() << ", tau=" << model.tau()
              << ", s=" << model.s_max() << ")\n";
    std::cout << "sensor ranks:";
    for (std::size_t i = 0; i < stack.p(); ++i) {
        std::cout << " S" << i + 1 << "=" << stack.sensors[i].rank;
    }
    std::cout << "\n\n" << std::left << std::setw(6) << "type" << std::setw(24) << "members"
              << std::setw(6) << "rank" << "class\n";
    std::vector<SensorSet> groups;
    for (std::size_t k = 0; k < partition.types.size(); ++k) {
        const SensorType& t = partition.types[k];
        std::cout << std::setw(6) << k + 1 << std::setw(24) << format_sensor_set(t.members)
                  << std::setw(6) << t.rank << to_string(classify_size(t.size(), model.s_max()))
                  << '\n';
        groups.push_back(t.members);
    }
    std::cout << "\npartition: ";
    for (std::size_t k = 0; k < groups.size(); ++k) {
        std::cout << (k ? "," : "") << format_sensor_set(groups[k]);
    }
    std::cout << "\nM_T = " << opt(partition.M_T) << "   m_T = " << opt(partition.m_T)
              << "\nelapsed: " << seconds << " s\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "partition.json", serialize_partition(partition));
        std::cout << "wrote " << (fs::path(out_dir) / "partition.json").string() << '\n';
    }
    return ok;
}

void print_summary(const char* label, const EstimatorSummary& s) {
    std::cout << "  " << std::left << std::setw(11) << label << " windows=" << s.windows
              << "  mean|Sigma|=" << std::setprecision(4) << s.mean_search_space
              << "  mean evaluated=" << s.mean_candidates << "  mean error=" << s.mean_error
              << "  max error=" << s.max_error << "  exhausted=" << s.exhausted
              << "  fallbacks=" << s.fallbacks << "  bound violations=" << s.bound_violations
              << '\n';
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, const Overrides& ov,
            bool certify) {
    Scenario scenario = load_scenario(scenario_path);
    ov.apply(scenario);
    const Pipeline pipeline(scenario);
    if (certify && !pipeline.sparse_observable()) {
        throw ObservabilityError("system is not " + std::to_string(2 * scenario.s_max) +
                                 "-sparse observable; error bounds cannot be certified");
    }
    const RunTrace trace = run_scenario(pipeline, scenario);

    std::cout << "scenario " << scenario.name << ": mode=" << to_string(scenario.estimator)
              << " agreement=" << to_string(scenario.agreement) << " seed=" << scenario.attack.seed
              << " windows=" << trace.windows.size()
              << " full |Sigma|=" << pipeline.solver().full_sigma().size() << '\n';
    std::size_t exhausted = 0;
    if (scenario.estimator != EstimatorMode::exhaustive) {
        const EstimatorSummary s = summarize_fsse(trace);
        print_summary("fsse", s);
        exhausted += s.exhausted;
    }
    if (scenario.estimator != EstimatorMode::fsse) {
        const EstimatorSummary s = summarize_exhaustive(trace);
        print_summary("exhaustive", s);
        if (scenario.estimator == EstimatorMode::exhaustive) {
            exhausted += s.exhausted;
        }
    }
    if (!pipeline.sparse_observable()) {
        std::cout << "  note: not " << 2 * scenario.s_max
                  << "-sparse observable; per-window error bounds are undefined\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const int n = pipeline.model().n(), m = pipeline.model().m(), p = pipeline.model().p();
        std::ofstream csv(fs::path(out_dir) / "trace.csv");
        write_trace_csv(csv, trace, n, m, p);
        std::ofstream agree(fs::path(out_dir) / "agreement.csv");
        write_agreement_csv(agree, trace);
        write_file(fs::path(out_dir) / "summary.json", summary_json(trace, pipeline));
        std::cout << "wrote trace.csv, agreement.csv, summary.json to " << out_dir << '\n';
    }
    return exhausted > 0 ? estimator_exhaustion : ok;
}

int cmd_table1(std::size_t p, int s, const std::string& out_dir) {
    const std::vector<SearchSpaceRow> rows = table1(p, s);
    std::ostringstream csv;
    csv << "row,types,failing,search_space_size,search_space\n";
    std::cout << "p=" << p << " s=" << s << " full |Sigma|=" << binomial(p, static_cast<std::size_t>(s))
              << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const AgreementConfig& c = rows[r].config;
        std::string types, failing;
        for (std::size_t k = 0; k < c.types.size(); ++k) {
            types += (k ? " " : "") + format_sensor_set(c.types[k]);
            if (c.types[k].size() > 1 && !c.agreeable[k]) {
                failing += (failing.empty() ? "" : " ") + format_sensor_set(c.types[k]);
            }
        }
        if (failing.empty()) failing = "-";
        std::cout << std::right << std::setw(3) << r + 1 << "  " << std::left << std::setw(34)
                  << types << " failing: " << std::setw(22) << failing << " |Sigma_T|="
                  << rows[r].pruned.size() << "  " << format_candidates(rows[r].pruned) << '\n';
        csv << r + 1 << ",\"" << types << "\",\"" << failing << "\"," << rows[r].pruned.size()
            << ",\"" << format_candidates(rows[r].pruned) << "\"\n";
    }
    const double avg = average_size(rows);
    const double full = static_cast<double>(binomial(p, static_cast<std::size_t>(s)));
    std::cout << "average |Sigma_T| = " << std::setprecision(6) << avg << "  (reduction "
              << std::setprecision(4) << 100.0 * (1.0 - avg / full) << "%)\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "table1.csv", csv.str());
    }
    return ok;
}

int cmd_method_table(const std::vector<std::size_t>& ps, int s, const std::string& out_dir) {
    std::ostringstream csv;
    csv << "p,exhaustive,two_failing,one_failing,all_failing,average\n";
    std::cout << std::left << std::setw(6) << "p" << std::setw(12) << "exhaustive" << std::setw(13)
              << "two failing" << std::setw(13) << "one failing" << std::setw(13) << "all failing"
              << "average\n";
    for (std::size_t p : ps) {
        const MethodTableRow r = method_table_row(p, s);
        std::cout << std::setw(6) << r.p << std::setw(12) << r.exhaustive << std::setw(13)
                  << r.two_failing << std::setw(13) << r.one_failing << std::setw(13)
                  << r.all_failing << r.average_ceil << '\n';
        csv << r.p << ',' << r.exhaustive << ',' << r.two_failing << ',' << r.one_failing << ','
            << r.all_failing << ',' << r.average_ceil << '\n';
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "method_table.csv", csv.str());
    }
    return ok;
}

int cmd_bench(const std::string& scenario_path, const std::string& out_dir, const Overrides& ov,
              int runs) {
    Scenario scenario = load_scenario(scenario_path);
    ov.apply(scenario);
    scenario.estimator = EstimatorMode::both;
    const Pipeline pipeline(scenario);
    const std::uint64_t base_seed = scenario.attack.seed;

    std::ostringstream csv;
    csv << std::setprecision(17)
        << "run,seed,fsse_mean_candidates,exh_mean_candidates,fsse_mean_search_space,"
           "fsse_mean_error,exh_mean_error,fsse_seconds,exh_seconds,fsse_exhausted,exh_exhausted\n";
    double fc = 0, ec = 0, fsec = 0, esec = 0, ferr = 0, eerr = 0;
    for (int r = 0; r < runs; ++r) {
        scenario.attack.seed = base_seed + static_cast<std::uint64_t>(r);
        const RunTrace trace = run_scenario(pipeline, scenario);
        const EstimatorSummary f = summarize_fsse(trace);
        const EstimatorSummary e = summarize_exhaustive(trace);
        fc += f.mean_candidates;
        ec += e.mean_candidates;
        fsec += f.seconds;
        esec += e.seconds;
        ferr += f.mean_error;
        eerr += e.mean_error;
        csv << r << ',' << scenario.attack.seed << ',' << f.mean_candidates << ','
            << e.mean_candidates << ',' << f.mean_search_space << ',' << f.mean_error << ','
            << e.mean_error << ',' << f.seconds << ',' << e.seconds << ',' << f.exhausted << ','
            << e.exhausted << '\n';
    }
    const double k = runs > 0 ? runs : 1;
    std::cout << "bench " << scenario.name << ": runs=" << runs << " full |Sigma|="
              << pipeline.solver().full_sigma().size() << '\n'
              << "  mean candidates evaluated per window: fsse=" << fc / k
              << "  exhaustive=" << ec / k << '\n'
              << "  mean estimation error: fsse=" << ferr / k << "  exhaustive=" << eerr / k
              << '\n'
              << "  estimator wall time: fsse=" << fsec << " s  exhaustive=" << esec
              << " s  ratio fsse/exhaustive=" << (esec > 0 ? fsec / esec : 0.0) << '\n'
              << "  (absolute times are hardware-dependent; compare counts and the ratio)\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "bench.csv", csv.str());
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure state estimation with sensor categorization"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, mode, agreement;
    std::optional<std::uint64_t> seed;
    int runs = 10;
    std::size_t p = 6;
    int s = 2;
    std::vector<std::size_t> p_list{10, 12, 14, 16, 18, 20};
    bool certify = false;

    auto* partition = app.add_subcommand("partition", "Partition the sensors into analytic types");
    partition->add_option("--scenario", scenario_path, "Scenario document")->required();
    partition->add_option("--out", out_dir, "Directory for partition.json");

    auto* run = app.add_subcommand("run", "Closed-loop run with attack injection");
    run->add_option("--scenario", scenario_path, "Scenario document")->required();
    run->add_option("--out", out_dir, "Directory for trace.csv, agreement.csv, summary.json");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--mode", mode, "fsse | exhaustive | both")
        ->check(CLI::IsMember({"fsse", "exhaustive", "both"}));
    run->add_option("--agreement", agreement, "mean | median")
        ->check(CLI::IsMember({"mean", "median"}));
    run->add_flag("--certify", certify, "Fail unless the error bounds are defined");

    auto* t1 = app.add_subcommand("table1", "Search-space sizes over agreement configurations");
    t1->add_option("--p", p, "Number of sensors");
    t1->add_option("--s", s, "Attack budget");
    t1->add_option("--out", out_dir, "Directory for table1.csv");

    auto* mt = app.add_subcommand("method-table", "Pairwise-type family search-space sizes");
    mt->add_option("--p-list", p_list, "Even sensor counts")->delimiter(',');
    mt->add_option("--s", s, "Attack budget");
    mt->add_option("--out", out_dir, "Directory for method_table.csv");

    auto* bench = app.add_subcommand("bench", "FSSE vs exhaustive search over seeded runs");
    bench->add_option("--scenario", scenario_path, "Scenario document")->required();
    bench->add_option("--out", out_dir, "Directory for bench.csv");
    bench->add_option("--seed", seed, "Base seed");
    bench->add_option("--agreement", agreement, "mean | median")
        ->check(CLI::IsMember({"mean", "median"}));
    bench->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : parse_failure;
    }

    const Overrides ov{seed, mode, agreement};
    try {
        if (*partition) return cmd_partition(scenario_path, out_dir);
        if (*run) return cmd_run(scenario_path, out_dir, ov, certify);
        if (*t1) return cmd_table1(p, s, out_dir);
        if (*mt) return cmd_method_table(p_list, s, out_dir);
        if (*bench) return cmd_bench(scenario_path, out_dir, ov, runs);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse_failure;
    } catch (const ObservabilityError& e) {
        std::cerr << "observability violation: " << e.what() << '\n';
        return observability_violation;
    } catch (const ExhaustionError& e) {
        std::cerr << "estimator exhausted: " << e.what() << '\n';
        return estimator_exhaustion;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other_error;
    }
    return other_error;
}
