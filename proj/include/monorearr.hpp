#pragma once

#include "monorearr/error.hpp"
#include "monorearr/func_core.hpp"
#include "monorearr/rearrange.hpp"
#include "monorearr/energy.hpp"
#include "monorearr/approx.hpp"
#include "monorearr/regularize.hpp"
#include "monorearr/campaign.hpp"
