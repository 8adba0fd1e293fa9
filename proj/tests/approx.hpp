#pragma once

#include <doctest.h>

// Purely relative comparison; doctest::Approx alone adds an absolute floor of epsilon.
inline doctest::Approx approx(double value) { return doctest::Approx(value).scale(0.0); }
