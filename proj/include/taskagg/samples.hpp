#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace taskagg {

/// Dense samples x models x tasks array of accuracies (bootstrap replicates,
/// posterior theta draws, posterior-predictive accuracies).
class SampleCube {
  public:
    SampleCube() = default;
    /// Throws CapacityError when the allocation cannot be satisfied.
    SampleCube(std::size_t samples, std::size_t models, std::size_t tasks);

    std::size_t samples() const noexcept { return samples_; }
    std::size_t models() const noexcept { return models_; }
    std::size_t tasks() const noexcept { return tasks_; }

    double& at(std::size_t s, std::size_t i, std::size_t j) { return data_[(s * models_ + i) * tasks_ + j]; }
    double at(std::size_t s, std::size_t i, std::size_t j) const { return data_[(s * models_ + i) * tasks_ + j]; }

    /// One model's task vector within a sample.
    std::span<const double> row(std::size_t s, std::size_t i) const {
        return {data_.data() + (s * models_ + i) * tasks_, tasks_};
    }
    std::span<double> row(std::size_t s, std::size_t i) { return {data_.data() + (s * models_ + i) * tasks_, tasks_}; }

    /// All models x tasks values of one sample, row-major.
    std::span<const double> sample(std::size_t s) const {
        return {data_.data() + s * models_ * tasks_, models_ * tasks_};
    }
    std::span<double> sample(std::size_t s) { return {data_.data() + s * models_ * tasks_, models_ * tasks_}; }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const SampleCube&) const = default;

  private:
    std::size_t samples_ = 0;
    std::size_t models_ = 0;
    std::size_t tasks_ = 0;
    std::vector<double> data_;
};

/// Bytes of physical memory, or SIZE_MAX when unknown.
std::size_t available_memory_bytes();

}  // namespace taskagg
