#pragma once

/// \file icann.hh
/// \brief Umbrella header.

#include <icann/autodiff.hh>
#include <icann/energy_network.hh>
#include <icann/errors.hh>
#include <icann/io.hh>
#include <icann/load_path.hh>
#include <icann/loading_protocols.hh>
#include <icann/potential_network.hh>
#include <icann/property_checks.hh>
#include <icann/scalar.hh>
#include <icann/tensor.hh>
#include <icann/training.hh>
#include <icann/viscoelastic_model.hh>
