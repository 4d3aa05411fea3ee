#pragma once

#include "eilscond/condnum.hpp"
#include "eilscond/densela.hpp"
#include "eilscond/errors.hpp"
#include "eilscond/genrand.hpp"
#include "eilscond/problem.hpp"
#include "eilscond/special.hpp"
