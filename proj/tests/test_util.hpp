// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_TESTS_TEST_UTIL_HPP
#define LSTAB_TESTS_TEST_UTIL_HPP

#include <Eigen/Core>

namespace lstab::testing {

template <class A, class B>
bool bitwise_equal(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.derived().array() == b.derived().array()).all();
}

}  // namespace lstab::testing

#endif
