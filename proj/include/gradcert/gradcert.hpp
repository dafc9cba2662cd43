#ifndef GRADCERT_GRADCERT_HPP_
#define GRADCERT_GRADCERT_HPP_

#include "certify.hpp"
#include "cli.hpp"
#include "descent.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "holder.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "problems.hpp"
#include "random.hpp"
#include "schedule.hpp"
#include "text.hpp"

#endif  // GRADCERT_GRADCERT_HPP_
