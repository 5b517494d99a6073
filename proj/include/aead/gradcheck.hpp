#pragma once

#include "aead/data.hpp"
#include "aead/losses.hpp"
#include "aead/nn.hpp"

namespace aead {

/// Compares the analytic gradient of the per-record training loss with central
/// differences (step `eps`) over every parameter. Returns
/// max |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
/// With `supervised` set the record must be labeled and the combined loss is used.
double gradient_check(const Network& net, const Record& sample, const LossConfig& loss_config,
                      double eps, bool supervised = false);

}  // namespace aead
