#pragma once

#include "sawqed/channel.hpp"
#include "sawqed/device.hpp"
#include "sawqed/dynamics.hpp"
#include "sawqed/fit.hpp"
#include "sawqed/idt.hpp"
#include "sawqed/params.hpp"
#include "sawqed/routing.hpp"
#include "sawqed/scattering.hpp"
#include "sawqed/transmon.hpp"
#include "sawqed/trap.hpp"
