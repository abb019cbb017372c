#pragma once

#include "spendlab/pipeline/experiment.hpp"

namespace spendlab {

// The seeded ranking benchmark used to compare models. Exposure rows pair users
// with paid games they never downloaded, so a ranked case asks which game a
// user pays for rather than which game they download. Every model shares one
// optimizer budget.
inline ExperimentConfig benchmark_config() {
  ExperimentConfig c;
  c.gen.n_users = 30000;
  c.gen.n_download_games = 500;
  c.gen.pay_affinity = 3.0;
  c.gen.exposures_per_user = 40.0;
  c.gen.seed = 1;
  c.eval.paid_positives = true;
  c.eval.max_cases = 3000;
  c.train.lr = 5e-3;
  c.train.batch_size = 256;
  c.train.epochs = 40;
  c.train.patience = 6;
  return c;
}

}  // namespace spendlab
