#include "wgeom/errors.hpp"
#include "wgeom/experiment.hpp"
#include "wgeom/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using json = nlohmann::json;
using wgeom::ExperimentSpec;
using wgeom::RunResult;

struct Flags {
    std::string manifold;
    std::string density;
    std::string potential;
    std::string point;
    std::string vector;
    std::string K;
    std::string N;
    std::string tolerance;
    std::string args;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 20240611;
    std::string theorem;
};

// "1, pi/2" -> [1, "pi/2"]
json list_arg(const std::string& text) {
    json out = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, e - b + 1);
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end && *end == '\0') out.push_back(v);
        else out.push_back(item);
    }
    return out;
}

json scalar_arg(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end && *end == '\0') return v;
    return text;
}

void write_result(const RunResult& r, const std::string& out, const std::string& format) {
    if (!r.csv.empty()) {
        if (out.empty()) {
            std::cout << wgeom::render(r, format);
        } else {
            std::ofstream f(out, std::ios::binary);
            if (!f) throw wgeom::InvalidArgument("cli", "cannot write " + out);
            f << wgeom::render(r, format);
        }
    }
    std::ostream& meta = out.empty() ? std::cerr : std::cout;
    for (const auto& l : r.log) meta << "# " << l << "\n";
    for (const auto& s : r.summary) meta << s << "\n";
    meta << "status: " << r.status << "\n";
}

int run_spec(const json& j, const std::string& out_override, const std::string& format_override) {
    ExperimentSpec spec;
    try {
        spec = wgeom::parse_spec(j);
    } catch (const wgeom::SchemaError& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return wgeom::exit_invalid_spec;
    }
    if (!out_override.empty()) spec.output_path = out_override;
    if (!format_override.empty()) spec.format = format_override;
    const RunResult r = wgeom::run_experiment(spec);
    try {
        write_result(r, spec.output_path, spec.format);
    } catch (const wgeom::Error& e) {
        std::cerr << e.what() << "\n";
        return wgeom::exit_numerical_error;
    }
    return r.exit_code;
}

json spec_from_flags(const std::string& task, const Flags& f) {
    json j;
    j["manifold"] = f.manifold.empty() ? "euclidean(2)" : f.manifold;
    if (!f.density.empty()) j["density"] = f.density;
    if (!f.potential.empty()) j["potential"] = f.potential;
    json args = f.args.empty() ? json::object() : json::parse(f.args);
    if (!args.is_object()) throw wgeom::SchemaError("/task/args", "--args must be a JSON object");
    if (!f.point.empty()) args["point"] = list_arg(f.point);
    if (!f.vector.empty()) {
        const char* key = task == "check" ? "direction" : task == "curvature" ? "Y" : "vector";
        args[key] = list_arg(f.vector);
    }
    if (!f.K.empty()) args["K"] = scalar_arg(f.K);
    if (!f.N.empty()) args["N"] = scalar_arg(f.N);
    if (!f.tolerance.empty()) args["tolerance"] = scalar_arg(f.tolerance);
    if (task == "check") args["theorem"] = f.theorem;
    j["task"] = {{"op", task}, {"args", args}};
    j["seed"] = f.seed;
    return j;
}

int list_bundle(bool as_json) {
    const auto& bundle = wgeom::reproduction_bundle();
    if (as_json) {
        json arr = json::array();
        for (const auto& e : bundle) arr.push_back(e.spec);
        std::cout << arr.dump(2) << "\n";
        return 0;
    }
    wgeom::report::Csv csv({"name", "task", "expected", "description"});
    for (const auto& e : bundle) {
        std::string task = e.spec["task"]["op"].get<std::string>();
        if (task == "check") task += " " + e.spec["task"]["args"]["theorem"].get<std::string>();
        csv.row(std::vector<std::string>{e.name, task, e.expected, e.description});
    }
    std::cout << wgeom::report::pretty_table(csv.str());
    return 0;
}

int reproduce(const std::string& name, const std::string& out, const std::string& format) {
    const auto& bundle = wgeom::reproduction_bundle();
    if (name != "all") {
        for (const auto& e : bundle)
            if (e.name == name) return run_spec(e.spec, out, format);
        std::cerr << "no bundle entry named '" << name << "'\n";
        return wgeom::exit_invalid_spec;
    }
    // Every entry; `out` names a directory for the per-entry CSV files.
    int mismatches = 0;
    for (const auto& e : bundle) {
        const ExperimentSpec spec = wgeom::parse_spec(e.spec);
        const RunResult r = wgeom::run_experiment(spec);
        const bool ok = r.status == e.expected;
        mismatches += ok ? 0 : 1;
        std::cout << e.name << ": " << r.status << " (expected " << e.expected << ")" << (ok ? "" : "  MISMATCH") << "\n";
        for (const auto& s : r.summary) std::cout << "  " << s << "\n";
        if (!out.empty()) {
            std::ofstream f(out + "/" + e.name + ".csv", std::ios::binary);
            if (!f) {
                std::cerr << "cannot write into " << out << "\n";
                return wgeom::exit_invalid_spec;
            }
            f << wgeom::render(r, format.empty() ? "csv" : format);
        }
    }
    std::cout << bundle.size() - mismatches << "/" << bundle.size() << " entries reached their expected status\n";
    return mismatches == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted connections on manifolds with density: curvature, transport and comparison checks"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifold", f.manifold, "catalog call, e.g. sphere_polar(2)");
        sub->add_option("--density", f.density, "density f in e^{-f}");
        sub->add_option("--potential", f.potential, "potential phi with f = (n-1) phi");
        sub->add_option("--point", f.point, "comma-separated coordinates");
        sub->add_option("--vector", f.vector, "comma-separated components");
        sub->add_option("--K", f.K, "model curvature, or 'sampled'");
        sub->add_option("--N", f.N, "Bakry-Emery dimension N");
        sub->add_option("--tolerance", f.tolerance, "acceptance tolerance");
        sub->add_option("--args", f.args, "further task arguments as a JSON object");
        sub->add_option("--seed", f.seed, "RNG seed");
        sub->add_option("--out", f.out, "output file (default: standard output)");
        sub->add_option("--format", f.format, "csv or pretty-table")->check(CLI::IsMember({"csv", "pretty-table"}));
    };

    std::vector<std::pair<std::string, CLI::App*>> tasks;
    for (const char* t : {"build-manifold", "curvature", "geodesic", "repar-distance", "transport", "holonomy",
                          "holonomy-algebra", "parallel-field", "distribution", "one-dim"}) {
        auto* sub = app.add_subcommand(t, std::string("run the ") + t + " task");
        add_common(sub);
        tasks.emplace_back(t, sub);
    }
    auto* check = app.add_subcommand("check", "run a comparison theorem check");
    add_common(check);
    check->add_option("theorem", f.theorem,
                      "riccati, mean_curvature, volume_element, laplacian, volume_annuli, volume_mu, bounded_f, myers, "
                      "finite_volume")
        ->required();
    tasks.emplace_back("check", check);

    std::string bundle_name;
    std::string out_dir;
    std::string format;
    auto* repro = app.add_subcommand("reproduce", "run a built-in reproduction spec, or all of them");
    repro->add_option("name", bundle_name, "bundle entry name or 'all'")->required();
    repro->add_option("--out", out_dir, "output file (a directory for 'all')");
    repro->add_option("--format", format, "csv or pretty-table")->check(CLI::IsMember({"csv", "pretty-table"}));

    bool as_json = false;
    auto* list = app.add_subcommand("list", "list the reproduction bundle");
    list->add_flag("--json", as_json, "print the bundle specs as JSON");

    std::string spec_path;
    auto* run = app.add_subcommand("run", "run an experiment spec file (JSON)");
    run->add_option("spec", spec_path, "spec file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "override the output path");
    run->add_option("--format", format, "csv or pretty-table")->check(CLI::IsMember({"csv", "pretty-table"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return wgeom::exit_invalid_spec;
    }

    try {
        if (*list) return list_bundle(as_json);
        if (*repro) return reproduce(bundle_name, out_dir, format);
        if (*run) {
            std::ifstream in(spec_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                std::cerr << "invalid spec: " << e.what() << "\n";
                return wgeom::exit_invalid_spec;
            }
            return run_spec(j, out_dir, format);
        }
        for (const auto& [name, sub] : tasks)
            if (*sub) return run_spec(spec_from_flags(name, f), f.out, f.format);
    } catch (const wgeom::SchemaError& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return wgeom::exit_invalid_spec;
    } catch (const json::exception& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return wgeom::exit_invalid_spec;
    }
    return wgeom::exit_invalid_spec;
}
