#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cext {

using Shape = std::vector<std::size_t>;

/// 64-byte aligned storage. Vectorised kernels then see the same alignment
/// on every call, which keeps results bitwise reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  /// Default-initialises, so resize() leaves doubles unwritten.
  template <class U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... A>
  void construct(U* p, A&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<A>(args)...);
  }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};
using Buffer = std::vector<double, AlignedAllocator<double>>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles with optional participation in a
/// gradient tape.
///
/// A Tensor is a reference-counted handle: copies of the handle share the
/// same buffer (this is what lets parameters accumulate gradients), but no
/// operation ever writes into its inputs. Every op returns a fresh buffer.
/// Use clone() for an independent copy.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  /// Contents unspecified; for op outputs that overwrite every element.
  static Tensor uninitialized(Shape shape);

  const Shape& shape() const { return impl_->shape; }
  std::size_t ndim() const { return impl_->shape.size(); }
  /// Size of dimension `axis`; negative values count from the back.
  std::size_t dim(int axis) const;
  std::size_t numel() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  /// Direct write access. Reserved for parameter initialisation and
  /// optimiser updates on leaf tensors.
  std::span<double> mutable_data() { return impl_->data; }
  double item() const;
  double operator[](std::size_t flat) const { return impl_->data[flat]; }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  std::span<double> mutable_grad();
  void zero_grad();

  /// Independent copy of the values, detached from any tape.
  Tensor clone() const;
  Tensor detach() const { return clone(); }

  bool same_buffer(const Tensor& other) const { return impl_ == other.impl_; }

  struct Impl {
    Shape shape;
    Buffer data;
    Buffer grad;
    bool requires_grad = false;

    Buffer& ensure_grad() {
      if (grad.empty()) grad.assign(data.size(), 0.0);
      return grad;
    }
  };
  const std::shared_ptr<Impl>& impl() const { return impl_; }

 private:
  std::shared_ptr<Impl> impl_;
};

/// Ordered record of differentiable operations. Recording order is a
/// topological order of the graph, so replaying it backwards visits every
/// node after all of its consumers and exactly once.
///
/// A tape belongs to one thread; see TapeScope.
class GradTape {
 public:
  using Backward = std::function<void()>;

  void record(Backward fn) { nodes_.push_back(std::move(fn)); }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1, replays the tape in reverse and clears it.
  /// Gradients accumulate into leaves (call zero_grad between steps).
  void backward(const Tensor& loss);

 private:
  std::vector<Backward> nodes_;
};

/// Makes `tape` the active tape of the calling thread for the scope's
/// lifetime. Ops only record when a tape is active.
class TapeScope {
 public:
  explicit TapeScope(GradTape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradTape* previous_;
};

GradTape* active_tape();

/// backward() on the thread's active tape.
void backward(const Tensor& loss);

}  // namespace cext
