#pragma once

#include "sconn/error.hpp"
#include "sconn/rational.hpp"
#include "sconn/scalar.hpp"
#include "sconn/form.hpp"
#include "sconn/supermodule.hpp"
#include "sconn/linalg.hpp"
#include "sconn/truncation.hpp"
#include "sconn/connection.hpp"
#include "sconn/normalform.hpp"
#include "sconn/chern.hpp"
#include "sconn/random.hpp"
#include "sconn/serialize.hpp"
#include "sconn/cli.hpp"
