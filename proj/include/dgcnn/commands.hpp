#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace dgcnn {

// Exit codes shared by every command.
enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_usage = 2,
    exit_runtime = 3,
};

struct TrainArgs {
    std::string config_path;
    std::string output_dir;  // overrides output_dir in the config
    std::string data_path;   // overrides dataset.path (and drops dataset.synthetic)
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool no_wall_time = false;
};

// Writes metrics.csv, checkpoint.json and run.log under the output directory.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path, std::size_t threads,
             std::ostream& out, std::ostream& err);

int cmd_retrieve(const std::string& checkpoint_path, const std::string& data_path, std::size_t query_id,
                 std::size_t k, const std::string& similarity, std::size_t threads, std::ostream& out,
                 std::ostream& err);

// form: exact | printed | printed_sigma | printed_mu
int cmd_gradcheck(std::uint64_t seed, std::size_t trials, const std::string& form, std::ostream& out,
                  std::ostream& err);

int cmd_synth(const std::string& kind, std::size_t per_class, std::size_t size_min, std::size_t size_max,
              const std::string& out_dir, std::uint64_t seed, std::ostream& out, std::ostream& err);

}  // namespace dgcnn
