#ifndef MORSELAND_MORSELAND_HPP
#define MORSELAND_MORSELAND_HPP

#include "morseland/core.hpp"
#include "morseland/landscape.hpp"
#include "morseland/flow.hpp"
#include "morseland/critical.hpp"
#include "morseland/connectome.hpp"
#include "morseland/stochastic.hpp"
#include "morseland/bifurcation.hpp"
#include "morseland/hopfield.hpp"
#include "morseland/diffusion.hpp"
#include "morseland/builtins.hpp"
#include "morseland/io.hpp"

#endif
