#ifndef KFWER_KFWER_HPP
#define KFWER_KFWER_HPP

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "stat_kernels.hpp"
#include "marginal.hpp"
#include "resampling.hpp"
#include "stepdown.hpp"
#include "fdp.hpp"
#include "augmentation.hpp"
#include "procedure.hpp"
#include "simulation.hpp"

#endif // KFWER_KFWER_HPP
