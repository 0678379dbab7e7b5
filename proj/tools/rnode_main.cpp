// rnode CLI: thin shell over the librnode C API.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "rnode/rnode.h"

namespace {

int report(rnode_status st, rnode_result* res) {
  if (st == RNODE_OK) {
    if (const char* j = rnode_result_json(res)) std::cout << j << std::endl;
  } else {
    const char* err = rnode_result_error(res);
    std::cerr << "error: " << (err ? err : "unknown") << std::endl;
  }
  rnode_result_free(res);
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roadside perception-node engine"};
  app.set_version_flag("--version", rnode_version());
  app.require_subcommand(1);

  std::string trace, config, zones, out, spec, events, gt;
  std::uint64_t seed = 1;
  bool realtime = false, pipelined = false;
  int reps = 3;

  auto* run = app.add_subcommand("run", "process a trace end to end");
  run->add_option("--trace", trace)->required();
  run->add_option("--config", config);
  run->add_option("--zones", zones);
  run->add_option("--out", out)->default_val("out");
  run->add_option("--seed", seed);
  run->add_flag("--realtime", realtime, "sleep to frame cadence");
  run->add_flag("--pipelined", pipelined, "two-stage threaded mode");

  auto* gen = app.add_subcommand("gen", "synthesize a labeled trace from a scenario spec");
  gen->add_option("--spec", spec)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--out", out)->required();

  auto* eval = app.add_subcommand("eval", "score an event log against ground truth");
  eval->add_option("--events", events)->required();
  eval->add_option("--gt", gt)->required();

  auto* bench = app.add_subcommand("bench", "throughput benchmark");
  bench->add_option("--trace", trace)->required();
  bench->add_option("--config", config);
  bench->add_option("--reps", reps)->default_val(3);

  auto* zcmd = app.add_subcommand("zones", "commissioning: derive the zone document");
  zcmd->add_option("--trace", trace)->required();
  zcmd->add_option("--config", config);
  zcmd->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  rnode_result* res = nullptr;
  rnode_status st = RNODE_ERR_INPUT;
  if (run->parsed()) {
    st = rnode_run(trace.c_str(), config.empty() ? nullptr : config.c_str(),
                   zones.empty() ? nullptr : zones.c_str(), out.c_str(), seed,
                   realtime ? 1 : 0, pipelined ? 1 : 0, &res);
  } else if (gen->parsed()) {
    st = rnode_generate(spec.c_str(), seed, out.c_str(), &res);
  } else if (eval->parsed()) {
    st = rnode_evaluate(events.c_str(), gt.c_str(), &res);
  } else if (bench->parsed()) {
    st = rnode_bench(trace.c_str(), config.empty() ? nullptr : config.c_str(), reps, &res);
  } else if (zcmd->parsed()) {
    st = rnode_derive_zones(trace.c_str(), config.empty() ? nullptr : config.c_str(),
                            out.c_str(), &res);
  }
  return report(st, res);
}
