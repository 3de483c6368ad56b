#pragma once

#include "contactlab/algebra.hpp"
#include "contactlab/config.hpp"
#include "contactlab/contact_form.hpp"
#include "contactlab/contact_maps.hpp"
#include "contactlab/dissipation.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/int_matrix.hpp"
#include "contactlab/jet.hpp"
#include "contactlab/polynomial.hpp"
#include "contactlab/report.hpp"
#include "contactlab/shapes.hpp"
