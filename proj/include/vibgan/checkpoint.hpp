// Binary checkpoints: magic "WDCG", format version, architecture
// descriptor, little-endian 64-bit parameter blobs, optimizer state, and
// rng state. Round-trips are bit-exact.
#pragma once

#include <filesystem>

#include "vibgan/classifier.hpp"
#include "vibgan/gan.hpp"

namespace vibgan {

void save_gan_checkpoint(const std::filesystem::path& path,
                         const GanCheckpoint& checkpoint);
GanCheckpoint load_gan_checkpoint(const std::filesystem::path& path);

void save_classifier_checkpoint(const std::filesystem::path& path,
                                const ClassifierCheckpoint& checkpoint);
ClassifierCheckpoint load_classifier_checkpoint(
    const std::filesystem::path& path);

}  // namespace vibgan
