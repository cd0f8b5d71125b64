#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "droplet/cli_io.hpp"

namespace {

int usage(std::ostream& os, int code) {
    os << "usage:\n"
          "  droplet simulate --config PATH [--out DIR] [--snapshots N] [--quiet]\n"
          "  droplet compare CONFIG_A CONFIG_B [--out DIR] [--quiet]\n"
          "  droplet verify SUITE [--out DIR] [--quiet]\n"
          "\n"
          "suites: elliptic, identities, regularization\n"
          "exit codes: 0 clean, 1 error, 2 monitor trip\n"
          "env: DROPLET_THREADS caps internal parallelism\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("DROPLET_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) Eigen::setNbThreads(n);
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) return usage(std::cerr, 1);
    const std::string cmd = args[0];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") return usage(std::cout, 0);

    std::optional<std::string> config, out;
    std::optional<int> snapshots;
    bool quiet = false;
    std::vector<std::string> positional;
    for (size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        const auto need_value = [&](const char* flag) -> std::string {
            if (i + 1 >= args.size()) {
                std::cerr << "error: " << flag << " needs a value\n";
                std::exit(1);
            }
            return args[++i];
        };
        if (a == "--config")
            config = need_value("--config");
        else if (a == "--out")
            out = need_value("--out");
        else if (a == "--snapshots")
            snapshots = std::atoi(need_value("--snapshots").c_str());
        else if (a == "--quiet")
            quiet = true;
        else if (!a.empty() && a[0] == '-') {
            std::cerr << "error: unknown flag '" << a << "'\n";
            return 1;
        } else {
            positional.push_back(a);
        }
    }

    if (cmd == "simulate") {
        if (!config && positional.size() == 1) {
            config = positional[0];
            positional.clear();
        }
        if (!config || !positional.empty()) return usage(std::cerr, 1);
        return droplet::cmd_simulate(*config, out, snapshots, quiet);
    }
    if (cmd == "compare") {
        if (positional.size() != 2) return usage(std::cerr, 1);
        return droplet::cmd_compare(positional[0], positional[1], out, quiet);
    }
    if (cmd == "verify") {
        if (positional.size() != 1) return usage(std::cerr, 1);
        return droplet::cmd_verify(positional[0], out, quiet);
    }
    std::cerr << "error: unknown command '" << cmd << "'\n";
    return usage(std::cerr, 1);
}
