#pragma once

#include <pfl/activation.hpp>
#include <pfl/architecture.hpp>
#include <pfl/bound.hpp>
#include <pfl/config.hpp>
#include <pfl/cubical.hpp>
#include <pfl/data.hpp>
#include <pfl/error.hpp>
#include <pfl/field.hpp>
#include <pfl/format_calculus.hpp>
#include <pfl/homology.hpp>
#include <pfl/landscape.hpp>
#include <pfl/network.hpp>
#include <pfl/report.hpp>
