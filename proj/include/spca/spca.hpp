// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "spca/error.hpp"
#include "spca/linalg.hpp"
#include "spca/component.hpp"
#include "spca/dspca.hpp"
#include "spca/greedy.hpp"
#include "spca/certificates.hpp"
#include "spca/experiments.hpp"
#include "spca/io.hpp"
