#include "fieldscope/state.hpp"

#include <stdexcept>

namespace fieldscope {

SystemMatrices SystemMatrices::make(double dk) {
    if (!(dk > 0.0)) throw std::invalid_argument("time step dk must be > 0");
    SystemMatrices m;
    m.dk = dk;
    m.F.setZero();
    m.F(0, 0) = 1.0;
    m.F(1, 1) = 1.0;
    m.B.setZero();
    m.B(0, 0) = dk;
    m.B(1, 1) = dk;
    m.B(2, 0) = 1.0;
    m.B(3, 1) = 1.0;
    m.H.setZero();
    m.H(0, 0) = 1.0;
    m.H(1, 1) = 1.0;
    return m;
}

}  // namespace fieldscope
