#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sentibench/error.hpp"
#include "sentibench/neural/train.hpp"

namespace sentibench {

struct SearchSpace {
  double lr_min = 1e-4, lr_max = 1e-2;
  double wd_min = 1e-5, wd_max = 1e-2;
  double ls_min = 1e-5, ls_max = 1e-1;
  double dropout_min = 0.1, dropout_max = 0.6;
  std::vector<std::size_t> hidden_dim1_choices = {64, 128, 256};
};

inline void validate_search_space(const SearchSpace& s) {
  auto check_log = [](double lo, double hi, const char* what) {
    if (lo <= 0.0 || hi < lo) throw InputError(std::string("search space: bad ") + what);
  };
  check_log(s.lr_min, s.lr_max, "lr range");
  check_log(s.wd_min, s.wd_max, "weight_decay range");
  check_log(s.ls_min, s.ls_max, "label_smoothing range");
  if (s.dropout_min < 0.0 || s.dropout_max >= 1.0 || s.dropout_max < s.dropout_min) {
    throw InputError("search space: bad dropout range");
  }
  if (s.hidden_dim1_choices.empty()) throw InputError("search space: no hidden_dim1 choices");
}

struct Trial {
  std::size_t index = 0;
  HyperParams hp;
  double val_loss = 0.0;
  double val_acc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_ran = 0;
};

struct SearchResult {
  std::vector<Trial> trials;
  std::size_t best_index = 0;
  HyperParams best;
};

// Seeded random search. Per trial the draws come from one sampler stream
// (derive_seed(seed, 0)) in the fixed order lr, weight_decay,
// label_smoothing (log-uniform), dropout (uniform), hidden_dim1
// (categorical); trial i trains with seed derive_seed(seed, i+1) and
// max_epochs clamped to budget_epochs. Best = lowest best-epoch val loss,
// earlier trial on ties.
inline SearchResult random_search(const Vocabulary& vocab, std::span<const TokenDoc> train_docs,
                                  std::span<const TokenDoc> val_docs, const HyperParams& base,
                                  const SearchSpace& space, std::size_t n_trials,
                                  std::uint64_t seed, std::size_t budget_epochs) {
  validate_search_space(space);
  if (n_trials == 0) throw InputError("random_search: n_trials must be positive");
  if (budget_epochs == 0) throw InputError("random_search: budget_epochs must be positive");

  SplitMix64 sampler(derive_seed(seed, 0));
  auto log_uniform = [&sampler](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * sampler.next_double());
  };

  SearchResult result;
  result.trials.reserve(n_trials);
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    HyperParams hp = base;
    hp.lr = log_uniform(space.lr_min, space.lr_max);
    hp.weight_decay = log_uniform(space.wd_min, space.wd_max);
    hp.label_smoothing = log_uniform(space.ls_min, space.ls_max);
    hp.dropout =
        space.dropout_min + (space.dropout_max - space.dropout_min) * sampler.next_double();
    hp.hidden_dim1 =
        space.hidden_dim1_choices[sampler.next_below(space.hidden_dim1_choices.size())];
    hp.max_epochs = budget_epochs;

    const TrainResult run =
        train_network(vocab, train_docs, val_docs, hp, derive_seed(seed, trial + 1));
    Trial row;
    row.index = trial;
    row.hp = hp;
    row.val_loss = run.best_val_loss;
    row.val_acc = run.history[run.best_epoch - 1].val_acc;
    row.best_epoch = run.best_epoch;
    row.epochs_ran = run.epochs_ran;
    result.trials.push_back(row);
  }
  result.best_index = 0;
  for (std::size_t i = 1; i < n_trials; ++i) {
    if (result.trials[i].val_loss < result.trials[result.best_index].val_loss) {
      result.best_index = i;
    }
  }
  result.best = result.trials[result.best_index].hp;
  return result;
}

}  // namespace sentibench
