#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "chemotaxsim/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume chemotaxis-consumption simulator and invariant auditor"};
    std::string config_path;
    chemotaxsim::DriverOptions opt;
    app.add_option("config", config_path, "run configuration file")->required();
    app.add_flag("--dry-run", opt.dry_run, "validate and print the run plan without writing fields");
    app.add_option("--jobs", opt.jobs, "max concurrent sweep/ladder runs")->default_val(1);
    app.add_option("--output", opt.output_override, "override the output directory");
    CLI11_PARSE(app, argc, argv);

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot open config file: " << config_path << "\n";
        return 4;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    try {
        chemotaxsim::RunConfig cfg = chemotaxsim::parse_config(buf.str());
        return chemotaxsim::execute(cfg, opt, std::cout);
    } catch (const chemotaxsim::config_error& e) {
        std::cerr << "config error:\n" << e.what();
        return 3;
    } catch (const chemotaxsim::parameter_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const chemotaxsim::io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 2;
    }
}
