#pragma once

#include "cuberec/core.hpp"
#include "cuberec/designs.hpp"
#include "cuberec/recover.hpp"
#include "cuberec/adversary.hpp"
#include "cuberec/envelopes.hpp"
#include "cuberec/battery.hpp"
#include "cuberec/io.hpp"
#include "cuberec/lab.hpp"
