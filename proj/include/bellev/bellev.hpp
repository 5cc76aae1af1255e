#ifndef BELLEV_BELLEV_HPP
#define BELLEV_BELLEV_HPP

#include "bellev/error.hpp"
#include "bellev/random.hpp"
#include "bellev/probability.hpp"
#include "bellev/quantum.hpp"
#include "bellev/lhv.hpp"
#include "bellev/prior.hpp"
#include "bellev/evidence.hpp"
#include "bellev/mle.hpp"
#include "bellev/bias_check.hpp"
#include "bellev/datasets.hpp"
#include "bellev/report.hpp"

#endif  // BELLEV_BELLEV_HPP
