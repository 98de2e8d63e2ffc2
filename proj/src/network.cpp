#include "crossview/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crossview/kernels.hpp"
#include "crossview/mathops.hpp"
#include "crossview/rng.hpp"

namespace crossview {

namespace {

Matrix glorot_uniform(std::size_t in_dim, std::size_t out_dim, SeededRng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    Matrix m(in_dim, out_dim);
    for (double& v : m.data) v = rng.uniform(-limit, limit);
    return m;
}

void check_tape(const ViewNetwork& net, const ForwardTape& tape) {
    require(tape.pre_activations.size() == net.layers.size() &&
                tape.activations.size() == net.layers.size() &&
                tape.input.size() == net.layers.front().weight.rows,
            "backward: tape does not match network");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        require(tape.pre_activations[l].size() == net.layers[l].weight.cols,
                "backward: tape layer " + std::to_string(l) + " does not match network");
    }
}

}  // namespace

ViewNetwork init_network(int view, int input_dim, const std::vector<int>& hidden_dims,
                         int embed_dim, int num_classes, std::uint64_t seed) {
    require(input_dim >= 1, "init: input_dim must be >= 1");
    require(embed_dim >= 1, "init: embed_dim must be >= 1");
    require(num_classes >= 1, "init: num_classes must be >= 1");
    for (const int h : hidden_dims) require(h >= 1, "init: hidden dims must be >= 1");

    ViewNetwork net;
    net.view = view;
    std::vector<int> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(embed_dim);

    // Seeding ignores the view label: networks for different views start
    // identical and diverge only through training.
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        SeededRng rng(derive_seed(seed, "net/layer", l));
        DenseLayer layer;
        layer.weight = glorot_uniform(dims[l], dims[l + 1], rng);
        layer.bias.assign(dims[l + 1], 0.0);
        net.layers.push_back(std::move(layer));
    }
    SeededRng head_rng(derive_seed(seed, "net/head"));
    net.head_weight = glorot_uniform(embed_dim, num_classes, head_rng);
    net.head_bias.assign(num_classes, 0.0);
    return net;
}

ForwardResult forward(const ViewNetwork& net, const Vec& features) {
    require(features.size() == net.layers.front().weight.rows,
            "forward: feature dim " + std::to_string(features.size()) + ", expected " +
                std::to_string(net.layers.front().weight.rows));
    ForwardResult out;
    out.tape.input = features;
    const Vec* x = &out.tape.input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Vec pre = affine(*x, net.layers[l].weight, net.layers[l].bias);
        const bool last = (l + 1 == net.layers.size());
        out.tape.activations.push_back(last ? pre : relu(pre));
        out.tape.pre_activations.push_back(std::move(pre));
        x = &out.tape.activations.back();
    }
    out.embedding = out.tape.activations.back();
    out.logits = affine(out.embedding, net.head_weight, net.head_bias);
    return out;
}

Vec embed(const ViewNetwork& net, const Vec& features) {
    require(features.size() == net.layers.front().weight.rows, "embed: feature dim mismatch");
    Vec x = features;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Vec pre = affine(x, net.layers[l].weight, net.layers[l].bias);
        x = (l + 1 == net.layers.size()) ? std::move(pre) : relu(pre);
    }
    return x;
}

ParamGrads zero_grads_like(const ViewNetwork& net) {
    ParamGrads g;
    for (const DenseLayer& layer : net.layers) {
        DenseLayer zero;
        zero.weight = Matrix(layer.weight.rows, layer.weight.cols);
        zero.bias.assign(layer.bias.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    g.head_weight = Matrix(net.head_weight.rows, net.head_weight.cols);
    g.head_bias.assign(net.head_bias.size(), 0.0);
    return g;
}

void backward_into(const ViewNetwork& net, const ForwardTape& tape, const Vec& grad_embedding,
                   const Vec& grad_logits, ParamGrads& acc) {
    check_tape(net, tape);
    require(grad_embedding.size() == static_cast<std::size_t>(net.embed_dim()),
            "backward: grad_embedding dim mismatch");
    require(grad_logits.size() == static_cast<std::size_t>(net.num_classes()),
            "backward: grad_logits dim mismatch");
    const auto& k = kernels::active();

    // Head: logits = head_W^T emb + head_b.
    const Vec& emb = tape.activations.back();
    Vec grad = grad_embedding;
    for (std::size_t i = 0; i < net.head_weight.rows; ++i) {
        k.axpy(emb[i], grad_logits.data(), acc.head_weight.row(i), net.head_weight.cols);
        grad[i] += k.dot(net.head_weight.row(i), grad_logits.data(), net.head_weight.cols);
    }
    k.axpy(1.0, grad_logits.data(), acc.head_bias.data(), grad_logits.size());

    // Layers, last to first. `grad` holds d(loss)/d(activation of layer l).
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        if (l + 1 != net.layers.size()) {
            k.relu_backward(tape.pre_activations[l].data(), grad.data(), grad.size());
        }
        const Matrix& w = net.layers[l].weight;
        const Vec& x = (l == 0) ? tape.input : tape.activations[l - 1];
        Vec grad_x(w.rows);
        for (std::size_t i = 0; i < w.rows; ++i) {
            k.axpy(x[i], grad.data(), acc.layers[l].weight.row(i), w.cols);
            grad_x[i] = k.dot(w.row(i), grad.data(), w.cols);
        }
        k.axpy(1.0, grad.data(), acc.layers[l].bias.data(), grad.size());
        grad = std::move(grad_x);
    }
}

ParamGrads backward(const ViewNetwork& net, const ForwardTape& tape, const Vec& grad_embedding,
                    const Vec& grad_logits) {
    ParamGrads g = zero_grads_like(net);
    backward_into(net, tape, grad_embedding, grad_logits, g);
    return g;
}

bool all_finite(const ParamGrads& grads) {
    for (const DenseLayer& layer : grads.layers) {
        if (!all_finite(layer.weight) || !all_finite(layer.bias)) return false;
    }
    return all_finite(grads.head_weight) && all_finite(grads.head_bias);
}

namespace {

void write_block(std::ofstream& out, const double* data, std::size_t n) {
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", data[i]);
        out << buf << (i + 1 == n ? '\n' : ' ');
    }
}

void read_block(std::istream& in, double* data, std::size_t n, const std::string& path) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> data[i])) throw ValidationError(path + ": truncated parameter block");
    }
}

}  // namespace

void save_checkpoint(const ViewNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << "CVSE-CKPT v1\n";
    out << "view " << net.view << '\n';
    out << "layers " << net.layers.size() << '\n';
    for (const DenseLayer& layer : net.layers) {
        out << "dims " << layer.weight.rows << ' ' << layer.weight.cols << '\n';
    }
    out << "head " << net.head_weight.rows << ' ' << net.head_weight.cols << '\n';
    for (const DenseLayer& layer : net.layers) {
        write_block(out, layer.weight.data.data(), layer.weight.data.size());
        write_block(out, layer.bias.data(), layer.bias.size());
    }
    write_block(out, net.head_weight.data.data(), net.head_weight.data.size());
    write_block(out, net.head_bias.data(), net.head_bias.size());
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

ViewNetwork load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "CVSE-CKPT v1") {
        throw ValidationError(path + ": not a CVSE-CKPT v1 checkpoint");
    }
    std::string key;
    ViewNetwork net;
    std::size_t layer_count = 0;
    if (!(in >> key >> net.view) || key != "view") throw ValidationError(path + ": bad view line");
    if (!(in >> key >> layer_count) || key != "layers" || layer_count == 0) {
        throw ValidationError(path + ": bad layers line");
    }
    for (std::size_t l = 0; l < layer_count; ++l) {
        std::size_t rows = 0, cols = 0;
        if (!(in >> key >> rows >> cols) || key != "dims" || rows == 0 || cols == 0) {
            throw ValidationError(path + ": bad dims line");
        }
        DenseLayer layer;
        layer.weight = Matrix(rows, cols);
        layer.bias.assign(cols, 0.0);
        net.layers.push_back(std::move(layer));
    }
    std::size_t head_rows = 0, head_cols = 0;
    if (!(in >> key >> head_rows >> head_cols) || key != "head" || head_rows == 0 || head_cols == 0) {
        throw ValidationError(path + ": bad head line");
    }
    require(head_rows == net.layers.back().weight.cols,
            path + ": head rows do not match last layer dim");
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        require(net.layers[l].weight.rows == net.layers[l - 1].weight.cols,
                path + ": layer dims do not chain");
    }
    net.head_weight = Matrix(head_rows, head_cols);
    net.head_bias.assign(head_cols, 0.0);
    for (DenseLayer& layer : net.layers) {
        read_block(in, layer.weight.data.data(), layer.weight.data.size(), path);
        read_block(in, layer.bias.data(), layer.bias.size(), path);
    }
    read_block(in, net.head_weight.data.data(), net.head_weight.data.size(), path);
    read_block(in, net.head_bias.data(), net.head_bias.size(), path);
    return net;
}

}  // namespace crossview
