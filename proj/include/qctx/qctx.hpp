#pragma once

#include "qctx/channel.hpp"
#include "qctx/errors.hpp"
#include "qctx/measure.hpp"
#include "qctx/mub.hpp"
#include "qctx/opcore.hpp"
#include "qctx/serialize.hpp"
#include "qctx/sharp_order.hpp"
