#ifndef BPGMF_BPGMF_HPP_
#define BPGMF_BPGMF_HPP_

#include "bpgmf/data_io.hpp"
#include "bpgmf/kernels.hpp"
#include "bpgmf/linalg.hpp"
#include "bpgmf/matrix.hpp"
#include "bpgmf/optimizers.hpp"
#include "bpgmf/oracle.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/prox.hpp"
#include "bpgmf/rng.hpp"
#include "bpgmf/roots.hpp"
#include "bpgmf/suites.hpp"
#include "bpgmf/svg_plot.hpp"
#include "bpgmf/trace_io.hpp"

#endif  // BPGMF_BPGMF_HPP_
