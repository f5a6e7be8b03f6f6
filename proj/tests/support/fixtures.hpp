#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "chipnet/io.hpp"

namespace fixtures {

inline std::string path(const std::string& design) {
    return std::string(CHIPNET_TEST_DATA) + "/" + design + "/design.json";
}

inline chipnet::DesignBundle load(const std::string& design) { return chipnet::load_design(path(design)); }

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("chipnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

    // Copies a fixture's files into the directory; returns the design file path.
    std::filesystem::path copy_fixture(const std::string& design) const {
        for (const auto& e : std::filesystem::directory_iterator(std::string(CHIPNET_TEST_DATA) + "/" + design))
            std::filesystem::copy_file(e.path(), dir_ / e.path().filename(),
                                       std::filesystem::copy_options::overwrite_existing);
        return dir_ / "design.json";
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
    }

private:
    std::filesystem::path dir_;
};

}  // namespace fixtures
