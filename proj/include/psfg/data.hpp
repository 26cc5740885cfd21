#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "psfg/errors.hpp"
#include "psfg/gan.hpp"
#include "psfg/matrix.hpp"
#include "psfg/rng.hpp"

namespace psfg {

struct LabeledDataset {
    Matrix samples; // [n x data_dim], values in [-1, 1]
    std::vector<std::uint16_t> labels;
    std::uint32_t class_count = 0;

    std::size_t size() const { return labels.size(); }
    std::uint32_t data_dim() const { return static_cast<std::uint32_t>(samples.cols()); }

    void validate() const {
        if (samples.rows() != labels.size()) {
            throw DataError("dataset: " + std::to_string(samples.rows()) + " samples vs " +
                            std::to_string(labels.size()) + " labels");
        }
        for (std::uint16_t l : labels) {
            if (l >= class_count) {
                throw DataError("dataset: label " + std::to_string(l) + " >= class_count " +
                                std::to_string(class_count));
            }
        }
    }
};

inline std::vector<std::uint16_t> present_classes(const LabeledDataset& ds) {
    std::set<std::uint16_t> s(ds.labels.begin(), ds.labels.end());
    return {s.begin(), s.end()};
}

inline LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    if (a.data_dim() != b.data_dim() || a.class_count != b.class_count) {
        throw DataError("concat_datasets: incompatible datasets");
    }
    LabeledDataset out;
    out.class_count = a.class_count;
    out.samples = Matrix(a.size() + b.size(), a.data_dim());
    std::copy(a.samples.data().begin(), a.samples.data().end(), out.samples.data().begin());
    std::copy(b.samples.data().begin(), b.samples.data().end(),
              out.samples.data().begin() + a.samples.size());
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    return out;
}

// 2-D mixture: class c is an isotropic Gaussian centered at angle 2*pi*c/C on
// the unit circle, stddev `spread`, clipped to [-1,1]. Samples are laid out
// class-major; normals are drawn one sample (one Box-Muller pair) at a time.
inline LabeledDataset make_gaussian_mixture(std::uint32_t classes, std::size_t per_class,
                                            float spread, Rng& rng) {
    if (classes < 2) {
        throw ConfigError("make_gaussian_mixture: need at least 2 classes");
    }
    LabeledDataset ds;
    ds.class_count = classes;
    ds.samples = Matrix(classes * per_class, 2);
    ds.labels.resize(classes * per_class);
    std::size_t row = 0;
    for (std::uint32_t c = 0; c < classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / classes;
        const float cx = static_cast<float>(std::cos(angle));
        const float cy = static_cast<float>(std::sin(angle));
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            float z[2];
            rng.fill_normal(z);
            ds.samples.at(row, 0) = std::clamp(cx + spread * z[0], -1.0f, 1.0f);
            ds.samples.at(row, 1) = std::clamp(cy + spread * z[1], -1.0f, 1.0f);
            ds.labels[row] = static_cast<std::uint16_t>(c);
        }
    }
    return ds;
}

namespace detail {
// 8x8 bitmap digits (classic PC font), MSB = leftmost pixel.
inline constexpr std::array<std::array<std::uint8_t, 8>, 10> kDigitGlyphs = {{
    {0x7C, 0xC6, 0xCE, 0xDE, 0xF6, 0xE6, 0x7C, 0x00},
    {0x30, 0x70, 0x30, 0x30, 0x30, 0x30, 0xFC, 0x00},
    {0x78, 0xCC, 0x0C, 0x38, 0x60, 0xCC, 0xFC, 0x00},
    {0x78, 0xCC, 0x0C, 0x38, 0x0C, 0xCC, 0x78, 0x00},
    {0x1C, 0x3C, 0x6C, 0xCC, 0xFE, 0x0C, 0x1E, 0x00},
    {0xFC, 0xC0, 0xF8, 0x0C, 0x0C, 0xCC, 0x78, 0x00},
    {0x38, 0x60, 0xC0, 0xF8, 0xCC, 0xCC, 0x78, 0x00},
    {0xFC, 0xCC, 0x0C, 0x18, 0x30, 0x30, 0x30, 0x00},
    {0x78, 0xCC, 0xCC, 0x78, 0xCC, 0xCC, 0x78, 0x00},
    {0x78, 0xCC, 0xCC, 0x7C, 0x0C, 0x18, 0x70, 0x00},
}};
} // namespace detail

// Procedural 8x8 digit raster: ink +1, background -1, plus per-pixel Gaussian
// noise of stddev `noise_sigma`, clipped to [-1,1]. data_dim = 64, row-major
// flattening. Class-major sample order, one 64-normal fill per sample.
inline LabeledDataset make_glyph_digits(std::uint32_t classes, std::size_t per_class,
                                        float noise_sigma, Rng& rng) {
    if (classes < 2 || classes > 10) {
        throw ConfigError("make_glyph_digits: classes must be in [2, 10]");
    }
    LabeledDataset ds;
    ds.class_count = classes;
    ds.samples = Matrix(classes * per_class, 64);
    ds.labels.resize(classes * per_class);
    std::size_t row = 0;
    std::array<float, 64> noise;
    for (std::uint32_t c = 0; c < classes; ++c) {
        const auto& glyph = detail::kDigitGlyphs[c];
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            rng.fill_normal(noise);
            for (std::size_t y = 0; y < 8; ++y) {
                for (std::size_t x = 0; x < 8; ++x) {
                    const float base = (glyph[y] >> (7 - x)) & 1 ? 1.0f : -1.0f;
                    ds.samples.at(row, y * 8 + x) =
                        std::clamp(base + noise_sigma * noise[y * 8 + x], -1.0f, 1.0f);
                }
            }
            ds.labels[row] = static_cast<std::uint16_t>(c);
        }
    }
    return ds;
}

enum class SplitKind : std::uint8_t {
    split1 = 1, // users x 1 single-class shard
    split2 = 2, // users x 2
    split3 = 3, // users x 3
    setup1 = 4, // 3 users: {0,1}, {2,3,4}, {5..9}
    custom = 5, // explicit per-user class lists
};

struct SplitSpec {
    SplitKind kind = SplitKind::split1;
    std::uint32_t num_users = 10;
    std::vector<std::vector<std::uint16_t>> assignment; // custom only
    std::uint64_t seed = 0;
};

// Per-user class sets implied by a split over `class_count` classes.
inline std::vector<std::vector<std::uint16_t>> split_class_sets(const SplitSpec& spec,
                                                                std::uint32_t class_count) {
    if (spec.kind == SplitKind::setup1) {
        if (spec.num_users != 3 || class_count != 10) {
            throw ConfigError("setup1 split requires 3 users and exactly 10 classes");
        }
        return {{0, 1}, {2, 3, 4}, {5, 6, 7, 8, 9}};
    }
    if (spec.kind == SplitKind::custom) {
        if (spec.assignment.size() != spec.num_users) {
            throw ConfigError("custom split: assignment size != num_users");
        }
        std::set<std::uint16_t> seen;
        for (const auto& classes : spec.assignment) {
            if (classes.empty()) throw ConfigError("custom split: empty class set");
            for (std::uint16_t c : classes) {
                if (c >= class_count) {
                    throw ConfigError("custom split: class " + std::to_string(c) + " out of range");
                }
                if (!seen.insert(c).second) {
                    throw ConfigError("custom split: class " + std::to_string(c) +
                                      " assigned twice");
                }
            }
        }
        if (seen.size() != class_count) {
            throw ConfigError("custom split: assignment must cover every class");
        }
        return spec.assignment;
    }

    // split1/2/3: users x k single-class shards, shard j holds a slice of
    // class j mod class_count; shard ids are dealt to users through a seeded
    // permutation, k consecutive shards per user.
    const std::uint32_t per_user = static_cast<std::uint32_t>(spec.kind);
    const std::uint32_t total = spec.num_users * per_user;
    if (class_count > total) {
        throw ConfigError("split: " + std::to_string(class_count) + " classes need at least " +
                          std::to_string(class_count) + " shards, have " + std::to_string(total));
    }
    std::vector<std::uint32_t> shard_ids(total);
    for (std::uint32_t j = 0; j < total; ++j) shard_ids[j] = j;
    Rng rng(derive_seed(spec.seed, seed_tag::shard_split));
    for (std::uint32_t i = total; i > 1; --i) {
        std::swap(shard_ids[i - 1], shard_ids[rng.bounded(i)]);
    }
    std::vector<std::vector<std::uint16_t>> sets(spec.num_users);
    for (std::uint32_t u = 0; u < spec.num_users; ++u) {
        std::set<std::uint16_t> classes;
        for (std::uint32_t k = 0; k < per_user; ++k) {
            classes.insert(static_cast<std::uint16_t>(shard_ids[u * per_user + k] % class_count));
        }
        sets[u] = {classes.begin(), classes.end()};
    }
    return sets;
}

// Single-class shards, disjoint, union = input dataset. split1/2/3 deal
// seeded-permuted shards; each class's samples are split evenly (seeded
// shuffle then contiguous chunks) among the shards carrying that class.
inline std::vector<LabeledDataset> partition(const LabeledDataset& ds, const SplitSpec& spec) {
    ds.validate();
    std::vector<std::vector<std::size_t>> by_class(ds.class_count);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by_class[ds.labels[i]].push_back(i);
    }

    // shard -> (class, slice index within class)
    struct Shard {
        std::uint16_t cls;
        std::vector<std::size_t> rows;
    };
    std::vector<Shard> shards;
    std::vector<std::vector<std::size_t>> user_shards; // shard ids per user

    Rng rng(derive_seed(spec.seed, seed_tag::shard_split));
    if (spec.kind == SplitKind::setup1 || spec.kind == SplitKind::custom) {
        const auto sets = split_class_sets(spec, ds.class_count);
        user_shards.resize(sets.size());
        for (std::size_t u = 0; u < sets.size(); ++u) {
            for (std::uint16_t c : sets[u]) {
                user_shards[u].push_back(shards.size());
                shards.push_back({c, by_class[c]});
            }
        }
    } else {
        const std::uint32_t per_user = static_cast<std::uint32_t>(spec.kind);
        const std::uint32_t total = spec.num_users * per_user;
        if (ds.class_count > total) {
            throw ConfigError("partition: more classes than shards");
        }
        // how many shards carry each class
        std::vector<std::uint32_t> shards_of_class(ds.class_count, 0);
        for (std::uint32_t j = 0; j < total; ++j) {
            shards_of_class[j % ds.class_count] += 1;
        }
        // split each class's rows into that many chunks after a seeded shuffle
        std::vector<std::vector<std::vector<std::size_t>>> chunks(ds.class_count);
        for (std::uint32_t c = 0; c < ds.class_count; ++c) {
            auto rows = by_class[c];
            for (std::size_t i = rows.size(); i > 1; --i) {
                std::swap(rows[i - 1], rows[rng.bounded(i)]);
            }
            const std::uint32_t k = shards_of_class[c];
            const std::size_t base = rows.size() / k, extra = rows.size() % k;
            std::size_t pos = 0;
            for (std::uint32_t s = 0; s < k; ++s) {
                const std::size_t len = base + (s < extra ? 1 : 0);
                chunks[c].emplace_back(rows.begin() + pos, rows.begin() + pos + len);
                pos += len;
            }
        }
        std::vector<std::uint32_t> next_chunk(ds.class_count, 0);
        shards.resize(total);
        for (std::uint32_t j = 0; j < total; ++j) {
            const std::uint16_t c = static_cast<std::uint16_t>(j % ds.class_count);
            shards[j] = {c, std::move(chunks[c][next_chunk[c]++])};
        }
        // deal shards to users via a seeded permutation
        std::vector<std::uint32_t> ids(total);
        for (std::uint32_t j = 0; j < total; ++j) ids[j] = j;
        for (std::uint32_t i = total; i > 1; --i) {
            std::swap(ids[i - 1], ids[rng.bounded(i)]);
        }
        user_shards.resize(spec.num_users);
        for (std::uint32_t u = 0; u < spec.num_users; ++u) {
            for (std::uint32_t k = 0; k < per_user; ++k) {
                user_shards[u].push_back(ids[u * per_user + k]);
            }
        }
    }

    std::vector<LabeledDataset> out(user_shards.size());
    for (std::size_t u = 0; u < user_shards.size(); ++u) {
        std::vector<std::size_t> rows;
        for (std::size_t sid : user_shards[u]) {
            rows.insert(rows.end(), shards[sid].rows.begin(), shards[sid].rows.end());
        }
        LabeledDataset& d = out[u];
        d.class_count = ds.class_count;
        d.samples = Matrix(rows.size(), ds.data_dim());
        d.labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = ds.samples.row(rows[i]);
            std::copy(src.begin(), src.end(), d.samples.row(i).begin());
            d.labels[i] = ds.labels[rows[i]];
        }
    }
    return out;
}

// Stratified withholding: ceil(fraction * n_c) seeded picks per class c.
// Returns (cloud, rest); together they repartition the input exactly.
inline std::pair<LabeledDataset, LabeledDataset> take_cloud_fraction(const LabeledDataset& ds,
                                                                     double fraction, Rng& rng) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw ConfigError("take_cloud_fraction: fraction must be in (0, 1]");
    }
    ds.validate();
    std::vector<std::size_t> cloud_rows, rest_rows;
    for (std::uint32_t c = 0; c < ds.class_count; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.labels[i] == c) rows.push_back(i);
        }
        const std::size_t k =
            std::min(rows.size(),
                     static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows.size()))));
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(rows[i], rows[i + rng.bounded(rows.size() - i)]);
        }
        cloud_rows.insert(cloud_rows.end(), rows.begin(), rows.begin() + k);
        rest_rows.insert(rest_rows.end(), rows.begin() + k, rows.end());
    }
    auto gather = [&ds](const std::vector<std::size_t>& rows) {
        LabeledDataset d;
        d.class_count = ds.class_count;
        d.samples = Matrix(rows.size(), ds.data_dim());
        d.labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = ds.samples.row(rows[i]);
            std::copy(src.begin(), src.end(), d.samples.row(i).begin());
            d.labels[i] = ds.labels[rows[i]];
        }
        return d;
    };
    return {gather(cloud_rows), gather(rest_rows)};
}

// batch_size uniform draws with replacement.
inline RealBatch sample_minibatch(const LabeledDataset& ds, std::size_t batch, Rng& rng) {
    if (ds.size() == 0) {
        throw DataError("sample_minibatch: empty dataset");
    }
    RealBatch rb;
    rb.x = Matrix(batch, ds.data_dim());
    rb.labels.resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t idx = rng.bounded(ds.size());
        const auto src = ds.samples.row(idx);
        std::copy(src.begin(), src.end(), rb.x.row(i).begin());
        rb.labels[i] = ds.labels[idx];
    }
    return rb;
}

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, std::size_t& offset, const char* what) {
    std::uint8_t buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (in.gcount() != 4) {
        throw DataError(std::string("idx: truncated ") + what + " at byte offset " +
                        std::to_string(offset));
    }
    offset += 4;
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

} // namespace detail

// IDX image/label pair (the MNIST container format). Pixels map affinely to
// [-1, 1]: 0 -> -1, 255 -> +1. Images flatten row-major.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataError("idx: cannot open " + images_path);
    std::size_t off = 0;
    if (detail::read_be_u32(img, off, "image magic") != 0x00000803u) {
        throw DataError("idx: bad image magic at byte offset 0 in " + images_path);
    }
    const std::uint32_t n = detail::read_be_u32(img, off, "image count");
    const std::uint32_t rows = detail::read_be_u32(img, off, "row count");
    const std::uint32_t cols = detail::read_be_u32(img, off, "col count");

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("idx: cannot open " + labels_path);
    std::size_t loff = 0;
    if (detail::read_be_u32(lab, loff, "label magic") != 0x00000801u) {
        throw DataError("idx: bad label magic at byte offset 0 in " + labels_path);
    }
    const std::uint32_t ln = detail::read_be_u32(lab, loff, "label count");
    if (ln != n) {
        throw DataError("idx: " + std::to_string(n) + " images vs " + std::to_string(ln) +
                        " labels");
    }

    LabeledDataset ds;
    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    ds.samples = Matrix(n, dim);
    ds.labels.resize(n);
    std::vector<std::uint8_t> buf(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim));
        if (static_cast<std::size_t>(img.gcount()) != dim) {
            throw DataError("idx: truncated image data at byte offset " +
                            std::to_string(off + static_cast<std::size_t>(img.gcount())));
        }
        off += dim;
        for (std::size_t j = 0; j < dim; ++j) {
            ds.samples.at(i, j) = static_cast<float>(buf[j]) / 127.5f - 1.0f;
        }
        char l;
        if (!lab.get(l)) {
            throw DataError("idx: truncated labels at byte offset " + std::to_string(loff));
        }
        loff += 1;
        ds.labels[i] = static_cast<std::uint8_t>(l);
    }
    ds.class_count = 10;
    ds.validate();
    return ds;
}

} // namespace psfg
