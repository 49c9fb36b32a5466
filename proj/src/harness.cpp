#include "gsn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

#include "gsn/io.hpp"
#include "gsn/svg.hpp"

namespace gsn {

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, const std::optional<NurseConfig>& nurse,
                                    int threads) {
    const int count = cfg.seeds.count;
    std::vector<TrialRecord> records(static_cast<size_t>(count));
    threads = std::clamp(threads, 1, count);

    std::atomic<int> cursor{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    const auto worker = [&] {
        while (true) {
            const int idx = cursor.fetch_add(1);
            if (idx >= count || failed.load()) break;
            try {
                records[idx] = run_trial(cfg, cfg.seeds.start + static_cast<uint64_t>(idx), nurse);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error_message.empty())
                    error_message = "trial seed " + std::to_string(cfg.seeds.start + idx) + ": " + e.what();
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw Error(error_message);
    return records;  // index order == seed order
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    const auto records = run_trials(cfg, cfg.nurse, threads);
    std::filesystem::create_directories(cfg.out_dir);
    ExperimentResult result;
    result.trials = static_cast<int>(records.size());
    for (const auto& rec : records) {
        write_trial_outputs(cfg.out_dir, rec);
        result.successes += rec.success ? 1 : 0;
    }
    result.success_rate = static_cast<double>(result.successes) / result.trials;
    return result;
}

CorrMatrix analyze_output_dir(const std::string& out_dir, Aggregate agg) {
    namespace fs = std::filesystem;
    std::vector<fs::path> trial_dirs;
    if (!fs::is_directory(out_dir)) throw IoError("analyze: no such directory " + out_dir);
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (entry.is_directory() && entry.path().filename().string().starts_with("trial_"))
            trial_dirs.push_back(entry.path());
    }
    if (trial_dirs.empty()) throw IoError("analyze: no trial_* directories under " + out_dir);

    std::vector<TrajectorySummary> summaries;
    summaries.reserve(trial_dirs.size());
    for (const auto& dir : trial_dirs) summaries.push_back(summarize_trajectory(read_trial_dir(dir.string()), agg));
    // Deterministic reduction order regardless of directory enumeration.
    std::sort(summaries.begin(), summaries.end(),
              [](const TrajectorySummary& a, const TrajectorySummary& b) { return a.seed < b.seed; });

    const CorrMatrix matrix = correlation_matrix(summaries);
    const fs::path analysis_dir = fs::path(out_dir) / "analysis";
    fs::create_directories(analysis_dir);
    write_text_file((analysis_dir / "summaries.csv").string(), summaries_csv(summaries));
    write_text_file((analysis_dir / "corr.csv").string(), corr_csv(matrix));
    write_text_file((analysis_dir / "corr.svg").string(), render_corr_svg(matrix));
    return matrix;
}

}  // namespace gsn
