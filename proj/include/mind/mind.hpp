#pragma once

#include "mind/admm.hpp"
#include "mind/chambolle_pock.hpp"
#include "mind/dictionary.hpp"
#include "mind/image.hpp"
#include "mind/linalg.hpp"
#include "mind/metrics.hpp"
#include "mind/pgm.hpp"
#include "mind/phantom.hpp"
#include "mind/problem.hpp"
#include "mind/regularizer.hpp"
#include "mind/semismooth_newton.hpp"
#include "mind/threshold.hpp"
#include "mind/wavelet.hpp"
