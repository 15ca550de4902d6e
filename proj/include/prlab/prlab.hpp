#pragma once

#include "prlab/error.hpp"
#include "prlab/dyadic.hpp"
#include "prlab/checkpoints.hpp"
#include "prlab/seqkernel.hpp"
#include "prlab/blockfile.hpp"
#include "prlab/gmap.hpp"
#include "prlab/testlang.hpp"
#include "prlab/sequence.hpp"
#include "prlab/correlate.hpp"
#include "prlab/martingale.hpp"
#include "prlab/battery.hpp"
#include "prlab/density.hpp"
#include "prlab/hcprg.hpp"
#include "prlab/transforms.hpp"
