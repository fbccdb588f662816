#pragma once

// Shared fixtures for the unit tests.

#include <cmath>
#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include "qspeed/qspeed.hpp"

namespace test {

using qspeed::ComplexMatrix;
using qspeed::ComplexVector;
using qspeed::cplx;

inline ComplexMatrix sx() { return qspeed::pauli_x(); }
inline ComplexMatrix sy() { return qspeed::pauli_y(); }
inline ComplexMatrix sz() { return qspeed::pauli_z(); }

inline ComplexMatrix diag(std::initializer_list<double> d) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<qspeed::Index>(d.size()), static_cast<qspeed::Index>(d.size()));
  qspeed::Index i = 0;
  for (double x : d) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

inline ComplexVector ket(std::initializer_list<cplx> c) {
  ComplexVector v(static_cast<qspeed::Index>(c.size()));
  qspeed::Index i = 0;
  for (cplx x : c) v(i++) = x;
  return v;
}

inline qspeed::PureState plus() { return qspeed::PureState::normalized(ket({1.0, 1.0})); }

inline qspeed::PureState ghz(int n) {
  ComplexVector v = ComplexVector::Zero(qspeed::int_pow(2, n));
  v(0) = v(v.size() - 1) = 1.0 / std::sqrt(2.0);
  return qspeed::PureState(v);
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline std::string data(const std::string& name) { return std::string(QSPEED_DATA_DIR) + "/" + name; }

}  // namespace test
