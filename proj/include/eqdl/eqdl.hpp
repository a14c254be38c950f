// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "eqdl/bench.hpp"
#include "eqdl/core.hpp"
#include "eqdl/engine.hpp"
#include "eqdl/equality.hpp"
#include "eqdl/incremental.hpp"
#include "eqdl/oracle.hpp"
#include "eqdl/rules.hpp"
#include "eqdl/saturation.hpp"
#include "eqdl/store.hpp"
