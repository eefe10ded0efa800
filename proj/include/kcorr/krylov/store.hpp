#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/krylov/space.hpp"

namespace kcorr::krylov {

/// Where Krylov vectors live. Vectors stay in memory until the budget is
/// exhausted; later ones are appended to a spill file in `spill_directory`.
struct StorageOptions {
  std::size_t memory_budget_bytes = std::numeric_limits<std::size_t>::max();
  std::filesystem::path spill_directory = std::filesystem::temp_directory_path();
};

/// Ordered list of basis vectors with handle indirection: element i is either
/// resident or a byte range in the spill file. Copies share the spill file.
template <class V>
class BasisStore {
public:
  using writer_type = std::function<void(const V&, std::ostream&)>;
  using reader_type = std::function<V(std::istream&)>;
  using sizer_type = std::function<std::size_t(const V&)>;

  BasisStore() = default;

  template <InnerProductSpace S>
    requires std::same_as<typename S::vector_type, V>
  BasisStore(const S& space, StorageOptions options) : options_(std::move(options)) {
    sizer_ = [space](const V& v) { return krylov::footprint(space, v); };
    if constexpr (SerializableSpace<S>) {
      writer_ = [space](const V& v, std::ostream& os) { space.write(v, os); };
      reader_ = [space](std::istream& is) { return space.read(is); };
    }
  }

  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  std::size_t resident_bytes() const { return resident_bytes_; }
  std::size_t spilled_count() const {
    std::size_t n = 0;
    for (const auto& s : slots_) n += std::holds_alternative<Spilled>(s) ? 1 : 0;
    return n;
  }

  void push_back(V v) {
    const std::size_t bytes = sizer_ ? sizer_(v) : sizeof(V);
    if (resident_bytes_ + bytes <= options_.memory_budget_bytes || !writer_) {
      if (resident_bytes_ + bytes > options_.memory_budget_bytes) {
        throw StorageError("memory budget exceeded and vectors cannot be spilled");
      }
      resident_bytes_ += bytes;
      slots_.emplace_back(std::move(v));
      return;
    }
    ensure_file();
    file_->stream.seekp(0, std::ios::end);
    const auto offset = static_cast<std::size_t>(file_->stream.tellp());
    writer_(v, file_->stream);
    file_->stream.flush();
    slots_.emplace_back(Spilled{offset});
  }

  /// Calls f(const V&) with element i, loading it from disk if needed.
  template <class F>
  decltype(auto) visit(std::size_t i, F&& f) const {
    if (i >= slots_.size()) throw IndexOutOfRange("basis index " + std::to_string(i));
    if (const auto* v = std::get_if<V>(&slots_[i])) return std::forward<F>(f)(*v);
    const auto& spilled = std::get<Spilled>(slots_[i]);
    file_->stream.seekg(static_cast<std::streamoff>(spilled.offset));
    const V loaded = reader_(file_->stream);
    return std::forward<F>(f)(loaded);
  }

  V get(std::size_t i) const {
    return visit(i, [](const V& v) { return v; });
  }

private:
  struct Spilled {
    std::size_t offset;
  };

  struct SpillFile {
    std::filesystem::path path;
    std::fstream stream;
    ~SpillFile() {
      stream.close();
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  };

  void ensure_file() {
    if (file_) return;
    auto f = std::make_shared<SpillFile>();
    static std::size_t counter = 0;
    std::filesystem::create_directories(options_.spill_directory);
    f->path = options_.spill_directory /
              ("kcorr-basis-" + std::to_string(reinterpret_cast<std::uintptr_t>(f.get())) +
               "-" + std::to_string(counter++) + ".bin");
    f->stream.open(f->path, std::ios::in | std::ios::out | std::ios::binary | std::ios::trunc);
    if (!f->stream) throw StorageError("cannot open spill file " + f->path.string());
    file_ = std::move(f);
  }

  StorageOptions options_{};
  writer_type writer_;
  reader_type reader_;
  sizer_type sizer_;
  std::vector<std::variant<V, Spilled>> slots_;
  std::size_t resident_bytes_ = 0;
  std::shared_ptr<SpillFile> file_;
};

} // namespace kcorr::krylov
