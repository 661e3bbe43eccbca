#include <iostream>

#include <CLI11.hpp>

#include "tnls/config.hpp"
#include "tnls/driver.hpp"
#include "tnls/error.hpp"
#include "tnls/kernels.hpp"

namespace {

int load(const std::string& path, tnls::RunConfig& cfg)
{
  try {
    cfg = tnls::parse_config_file(path);
    return 0;
  } catch (const tnls::Error& e) {
    std::cerr << "config error (" << tnls::to_string(e.kind()) << "): " << e.what() << "\n";
    return tnls::exit_code_for(e.kind());
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Spectral solver and estimate checks for the critical twisted-Laplacian NLS"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string isa = "auto";
  auto* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("-o,--output-dir", output_dir, "override output_dir");
  run->add_option("--isa", isa, "kernel set: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  auto* validate = app.add_subcommand("validate", "parse and check a config without computing");
  validate->add_option("config", config_path, "config file")->required();

  app.add_subcommand("print-defaults", "print every key with its default");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("print-defaults")) {
    std::cout << tnls::default_config_text();
    return 0;
  }

  tnls::RunConfig cfg;
  if (const int rc = load(config_path, cfg)) {
    return rc;
  }
  if (app.got_subcommand("validate")) {
    std::cout << "valid (config_hash " << cfg.hash_hex() << ")\n" << cfg.canonical_text();
    return 0;
  }

  if (isa == "scalar") {
    tnls::kernels::force_isa(tnls::kernels::Isa::Scalar);
  } else if (isa == "avx2") {
    if (!tnls::kernels::isa_available(tnls::kernels::Isa::Avx2)) {
      std::cerr << "avx2 kernels are not available on this machine\n";
      return 3;
    }
    tnls::kernels::force_isa(tnls::kernels::Isa::Avx2);
  }
  if (!output_dir.empty()) {
    cfg.output_dir = output_dir;
  }
  return tnls::run_experiment(cfg, std::cout).exit_code;
}
