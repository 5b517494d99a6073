#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "aead/nn.hpp"

namespace aead::test {

/// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("aead_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline DenseLayer make_layer(std::size_t out, std::size_t in, std::initializer_list<double> weights,
                             std::vector<double> biases, Activation act) {
    DenseLayer layer;
    layer.weights = Matrix(out, in);
    std::size_t i = 0;
    for (double w : weights) layer.weights.values()[i++] = w;
    layer.biases = std::move(biases);
    layer.activation = act;
    return layer;
}

/// Single Linear identity layer of the given width.
inline Network identity_net(std::size_t n) {
    Network net;
    DenseLayer layer;
    layer.weights = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) layer.weights(i, i) = 1.0;
    layer.biases.assign(n, 0.0);
    layer.activation = Activation::Linear;
    net.layers.push_back(layer);
    net.latent_index = 0;
    return net;
}

}  // namespace aead::test
