// nlsh-lab: runs the NLS/NLSH experiments and writes CSV output.
//
//   nlsh-lab <experiment> [--config <file>] [--override key=value ...]
//   nlsh-lab tableau <name>
//   nlsh-lab methods

#include "nlsh/nlsh.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

int fail(const std::string& kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NLS / NLSH solver experiments"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> overrides;
    std::vector<std::pair<CLI::App*, nlsh::ExperimentKind>> experiments;
    for (auto kind : {nlsh::ExperimentKind::ap_study, nlsh::ExperimentKind::aa_study,
                      nlsh::ExperimentKind::relaxation_study, nlsh::ExperimentKind::riemann,
                      nlsh::ExperimentKind::bound_state, nlsh::ExperimentKind::phase_portrait}) {
        auto* sub = app.add_subcommand(nlsh::to_string(kind), std::string("run ") + nlsh::to_string(kind));
        sub->add_option("--config", config_file, "flat key=value config file");
        sub->add_option("--override", overrides, "key=value applied after the config file")->take_all();
        experiments.emplace_back(sub, kind);
    }

    std::string tableau_name;
    auto* tab = app.add_subcommand("tableau", "print a registered tableau");
    tab->add_option("name", tableau_name)->required();
    auto* list = app.add_subcommand("methods", "list registered method names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*tab) {
            std::cout << nlsh::dump(nlsh::get_method(tableau_name));
            return 0;
        }
        if (*list) {
            for (const auto& m : nlsh::available_methods()) std::cout << m << "\n";
            return 0;
        }
        for (const auto& [sub, kind] : experiments) {
            if (!*sub) continue;
            const auto cfg = config_file.empty() ? nlsh::parse_config("", overrides, kind)
                                                 : nlsh::load_config(config_file, overrides, kind);
            const auto files = nlsh::run_experiment(cfg, std::cerr);
            nlohmann::json out{{"experiment", nlsh::to_string(kind)}, {"files", nlohmann::json::array()}};
            for (const auto& f : files) out["files"].push_back(f.string());
            std::cout << out.dump() << std::endl;
            return 0;
        }
    } catch (const nlsh::NonFiniteState& e) {
        return fail(e.kind(), e.what());
    } catch (const nlsh::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return fail("usage", "no subcommand");
}
