#pragma once

#include "evrange/accumulation.hpp"
#include "evrange/config.hpp"
#include "evrange/count_frame.hpp"
#include "evrange/error.hpp"
#include "evrange/evaluation.hpp"
#include "evrange/event.hpp"
#include "evrange/event_io.hpp"
#include "evrange/filtering.hpp"
#include "evrange/poc.hpp"
#include "evrange/ranging.hpp"
#include "evrange/separation.hpp"
#include "evrange/synthgen.hpp"
