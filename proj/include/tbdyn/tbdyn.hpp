#pragma once

#include "tbdyn/boubaker.hpp"
#include "tbdyn/bpes.hpp"
#include "tbdyn/dynamics.hpp"
#include "tbdyn/errors.hpp"
#include "tbdyn/io.hpp"
#include "tbdyn/model.hpp"
#include "tbdyn/stability.hpp"
