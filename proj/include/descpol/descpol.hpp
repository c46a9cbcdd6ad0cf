#pragma once

#include "descpol/config.hpp"
#include "descpol/conventional.hpp"
#include "descpol/descriptive.hpp"
#include "descpol/dqn.hpp"
#include "descpol/environment.hpp"
#include "descpol/errors.hpp"
#include "descpol/experiment.hpp"
#include "descpol/federated.hpp"
#include "descpol/item_sale.hpp"
#include "descpol/lagrangian.hpp"
#include "descpol/network.hpp"
#include "descpol/network_io.hpp"
#include "descpol/output.hpp"
#include "descpol/partition.hpp"
#include "descpol/random.hpp"
#include "descpol/tabular.hpp"
#include "descpol/translation.hpp"
#include "descpol/wireless.hpp"
