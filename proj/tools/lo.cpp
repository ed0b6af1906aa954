// Command-line front end: one subcommand per harness task.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "lo/error.hpp"
#include "lo/harness.hpp"
#include "lo/parallel.hpp"

namespace {

using lo::io::Json;

struct Flag {
    const char* name;  // CLI flag without dashes
    const char* key;   // parameter key
    const char* help;
};

// Values that may be lists are split on commas.
Json list_or_scalar(const std::string& text) {
    if (text.find(',') == std::string::npos) return text;
    Json arr = Json::array();
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) arr.push_back(part);
    return arr;
}

struct Command {
    CLI::App* app;
    lo::Task task;
    std::map<std::string, std::string> values;
    std::string out, cert_out, trace_out;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact small-ball probabilities, GAP tools and structure certificates"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    std::string report;
    app.add_option("--threads", threads, "Worker threads (default: LO_THREADS or all cores)");
    app.add_option("--report", report, "Write the full run report JSON here");

    const std::map<lo::Task, const char*> about = {
        {lo::Task::rho, "Small-ball probability of a linear, bilinear or quadratic form"},
        {lo::Task::construct, "Build a structured instance with planted data"},
        {lo::Task::decouple, "Compare a quadratic form with its decoupled bilinear bound"},
        {lo::Task::inverse_linear, "Fit a generalized arithmetic progression to points"},
        {lo::Task::inverse_bilinear, "Structure certificate for a bilinear form"},
        {lo::Task::inverse_quadratic, "Structure certificate for a quadratic form"},
        {lo::Task::verify, "Check a certificate's row bounds"},
        {lo::Task::accept, "Run the acceptance criteria"},
    };
    const std::vector<std::pair<lo::Task, std::vector<Flag>>> specs = {
        {lo::Task::rho,
         {{"form", "form", "linear|bilinear|quadratic"},
          {"matrix", "matrix", "Coefficient JSON file"},
          {"dist", "dist", "Input distribution (bernoulli, lazy-bernoulli:mu, sym-bernoulli, lazy-sym-bernoulli, or a file)"},
          {"dist2", "dist2", "Law of the second bilinear argument"},
          {"beta", "beta", "Ball radius"},
          {"mode", "mode", "exact|mc"},
          {"center", "center", "sup, or a centre such as 0 or 1/2,0"},
          {"samples", "samples", "Monte Carlo samples"},
          {"seed", "seed", "Random seed"},
          {"grid", "grid", "Monte Carlo centre grid (d = 1, comma separated)"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::construct,
         {{"kind", "kind", "ex1.1|ex1.4|ex1.5|ex1.6"},
          {"params", "params", "Construction parameter JSON file"},
          {"seed", "seed", "Random seed"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::decouple,
         {{"matrix", "matrix", "Symmetric matrix JSON file (optional b)"},
          {"subset", "subset", "U as 0b0101, a decimal mask, or 0-based indices 0,2"},
          {"beta", "beta", "Ball radius"},
          {"dist", "dist", "Input distribution"},
          {"clog", "clog", "c_log in tau = c_log beta sqrt(ln n)"},
          {"center", "center", "sup, or a fixed centre"},
          {"condition", "condition", "c1,c2,c3 to check the non-degeneracy condition"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::inverse_linear,
         {{"points", "points", "Points JSON file"},
          {"beta", "beta", "Closeness radius"},
          {"params", "params", "Fit parameter JSON file"}}},
        {lo::Task::inverse_bilinear,
         {{"matrix", "matrix", "Matrix JSON file"},
          {"beta", "beta", "Ball radius"},
          {"dist", "dist", "Law of x"},
          {"dist-y", "dist_y", "Law of y (default: same as x)"},
          {"params", "params", "Fit parameter JSON file"},
          {"y-mode", "y_mode", "exhaustive|sample:N"},
          {"seed", "seed", "Sampling seed"},
          {"rho", "rho", "Hypothesis witness (computed exactly when absent)"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::inverse_quadratic,
         {{"matrix", "matrix", "Symmetric matrix JSON file"},
          {"beta", "beta", "Ball radius"},
          {"dist", "dist", "Law of xi"},
          {"params", "params", "Fit parameter JSON file"},
          {"subsets", "subsets", "exhaustive|sample:N"},
          {"y-mode", "y_mode", "exhaustive|sample:N"},
          {"seed", "seed", "Sampling seed"},
          {"rho", "rho", "Hypothesis witness"},
          {"min-subset-fraction", "min_subset_fraction", "Required share of agreeing subsets"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::verify,
         {{"matrix", "matrix", "Matrix JSON file"},
          {"cert", "cert", "Certificate JSON file"},
          {"beta", "beta", "Base radius"},
          {"dist", "dist", "Law of z (default lazy-sym-bernoulli)"},
          {"budget", "budget", "Enumeration budget"}}},
        {lo::Task::accept, {{"level", "level", "quick|full"}}},
    };

    std::vector<Command> commands;
    commands.reserve(specs.size());
    for (const auto& [task, flags] : specs) {
        commands.push_back(Command{app.add_subcommand(lo::to_string(task), about.at(task)), task, {}, {}, {}, {}});
        Command& c = commands.back();
        for (const auto& f : flags) {
            c.values[f.key];
            c.app->add_option(std::string("--") + f.name, c.values[f.key], f.help);
        }
        c.app->add_option("--out", c.out, "Write the payload JSON here instead of stdout");
        if (task == lo::Task::inverse_bilinear || task == lo::Task::inverse_quadratic) {
            c.app->add_option("--cert", c.cert_out, "Also write the certificate JSON here");
            c.app->add_option("--trace", c.trace_out, "Also write the trace JSON here");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (threads) lo::set_thread_count(threads);

    for (auto& c : commands) {
        if (!c.app->parsed()) continue;
        lo::ExperimentConfig config;
        config.task = c.task;
        for (const auto& [key, value] : c.values) {
            if (value.empty()) continue;
            config.params[key] = (key == "center" || key == "condition" || key == "grid") ? list_or_scalar(value)
                                                                                         : Json(value);
        }
        if (config.params.contains("condition") && !config.params["condition"].is_array())
            config.params["condition"] = Json::array({config.params["condition"]});
        if (config.params.contains("grid") && !config.params["grid"].is_array())
            config.params["grid"] = Json::array({config.params["grid"]});
        if (!report.empty()) config.output = report;

        const lo::RunReport r = lo::run(config);
        if (r.exit_code != 0) {
            std::cerr << r.error_message << '\n';
            return r.exit_code;
        }
        try {
            if (!c.cert_out.empty()) lo::io::write_file(c.cert_out, r.payload.at("certificate"));
            if (!c.trace_out.empty()) lo::io::write_file(c.trace_out, r.payload.at("trace"));
            if (!c.out.empty())
                lo::io::write_file(c.out, r.payload);
            else
                std::cout << r.payload.dump(2) << '\n';
        } catch (const lo::Error& e) {
            std::cerr << e.what() << '\n';
            return static_cast<int>(e.exit_code());
        }
        if (c.task == lo::Task::accept && !r.payload.value("all_passed", false)) return 1;
        return 0;
    }
    return 2;
}
