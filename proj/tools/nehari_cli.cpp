#include "nehari/run.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Two-branch Nehari solver for radial fourth-order problems"};
    std::string config_path;
    std::string mode;
    std::string out_dir;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--mode", mode, "override the configured mode")
        ->check(CLI::IsMember({"solve", "constants", "expansion", "gap", "sharp-sweep"}));
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--quiet", quiet, "suppress progress lines");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::ifstream in(config_path);
    if (!in) {
        const nlohmann::json err = {{"status", "error"},
                                    {"error", {{"kind", "validation"}, {"message", "cannot read " + config_path}}}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto outcome = nehari::run_text(buffer.str(), mode.empty() ? std::nullopt : std::optional<std::string>(mode),
                                          out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir), quiet);
    if (!quiet)
        for (const auto& f : outcome.files) std::cout << "wrote " << f << '\n';
    return static_cast<int>(outcome.code);
}
