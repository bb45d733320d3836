#include "mrda/losses.hpp"

#include <stdexcept>

namespace mrda {

using nn::Tape;
using nn::Var;

template <typename T>
Var l_rec(Tape<T>& tape, Var sr, Var hr) {
  if (tape.value(sr).shape() != tape.value(hr).shape()) {
    throw std::invalid_argument("l_rec: SR " + nn::shape_to_string(tape.value(sr).shape()) + " vs HR " +
                                nn::shape_to_string(tape.value(hr).shape()));
  }
  return nn::mean_abs_diff(tape, sr, hr);
}

template <typename T>
Var l_kl(Tape<T>& tape, Var d_teacher, Var d_student) {
  return nn::softmax_kl(tape, nn::detach(tape, d_teacher), d_student);
}

template <typename T>
Var l_abs(Tape<T>& tape, Var d_teacher, Var d_student) {
  if (tape.value(d_teacher).shape() != tape.value(d_student).shape()) {
    throw std::invalid_argument("l_abs: representation lengths differ");
  }
  return nn::mean_abs_diff(tape, nn::detach(tape, d_teacher), d_student);
}

template <typename T>
Var l_classic(Tape<T>& tape, Var sr, Var hr, Var d_teacher, Var d_student, T lambda_kl, T lambda_abs) {
  if (lambda_kl < 0 || lambda_abs < 0) throw std::invalid_argument("loss weights must be nonnegative");
  Var total = l_rec(tape, sr, hr);
  total = nn::add(tape, total, nn::scale(tape, l_kl(tape, d_teacher, d_student), lambda_kl));
  total = nn::add(tape, total, nn::scale(tape, l_abs(tape, d_teacher, d_student), lambda_abs));
  return total;
}

namespace {
template <typename F>
double on_vectors(std::span<const double> a, std::span<const double> b, F&& loss) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("representation lengths differ");
  const int d = static_cast<int>(a.size());
  Tape<double> tape;
  const Var va = tape.constant(nn::Tensor<double>(nn::Shape{1, d}, std::vector<double>(a.begin(), a.end())));
  const Var vb = tape.constant(nn::Tensor<double>(nn::Shape{1, d}, std::vector<double>(b.begin(), b.end())));
  return tape.value(loss(tape, va, vb))[0];
}
}  // namespace

double l_kl_value(std::span<const double> d_teacher, std::span<const double> d_student) {
  return on_vectors(d_teacher, d_student, [](Tape<double>& t, Var a, Var b) { return l_kl(t, a, b); });
}

double l_abs_value(std::span<const double> d_teacher, std::span<const double> d_student) {
  return on_vectors(d_teacher, d_student, [](Tape<double>& t, Var a, Var b) { return l_abs(t, a, b); });
}

#define MRDA_INSTANTIATE_LOSSES(T)                                    \
  template Var l_rec<T>(Tape<T>&, Var, Var);                          \
  template Var l_kl<T>(Tape<T>&, Var, Var);                           \
  template Var l_abs<T>(Tape<T>&, Var, Var);                          \
  template Var l_classic<T>(Tape<T>&, Var, Var, Var, Var, T, T);

MRDA_INSTANTIATE_LOSSES(float)
MRDA_INSTANTIATE_LOSSES(double)

}  // namespace mrda
