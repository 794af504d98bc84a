#ifndef CDKN_HPP
#define CDKN_HPP

#include "cdkn/errors.hpp"
#include "cdkn/parallel.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/geodesics.hpp"
#include "cdkn/transport_lp.hpp"
#include "cdkn/transport.hpp"
#include "cdkn/entropy.hpp"
#include "cdkn/cd_verify.hpp"
#include "cdkn/poincare.hpp"
#include "cdkn/uniqueness.hpp"
#include "cdkn/spaces.hpp"
#include "cdkn/io.hpp"

#endif  // CDKN_HPP
