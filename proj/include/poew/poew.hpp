#pragma once

#include "poew/bits.hpp"
#include "poew/chain.hpp"
#include "poew/cipher.hpp"
#include "poew/codec.hpp"
#include "poew/des.hpp"
#include "poew/feistel.hpp"
#include "poew/miner.hpp"
#include "poew/profile.hpp"
#include "poew/puzzle.hpp"
#include "poew/sha256.hpp"
#include "poew/simnet.hpp"
