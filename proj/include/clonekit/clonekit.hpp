#pragma once

#include <clonekit/centraliser.hpp>
#include <clonekit/clone.hpp>
#include <clonekit/commutation.hpp>
#include <clonekit/domain.hpp>
#include <clonekit/error.hpp>
#include <clonekit/fixtures.hpp>
#include <clonekit/io.hpp>
#include <clonekit/operation.hpp>
#include <clonekit/ppformula.hpp>
#include <clonekit/relation.hpp>
#include <clonekit/snow.hpp>
#include <clonekit/synthesis.hpp>
#include <clonekit/version.hpp>
