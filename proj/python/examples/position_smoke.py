"""ROMAN in front of a small random-kernel pooled convolution classifier.

Runs the position task with and without routing and prints both test
accuracies. The classifier lives here, outside the package.
"""

import argparse

import numpy as np
from sklearn.linear_model import RidgeClassifierCV

import roman


def random_kernels(rng, channels, length, count):
    kernels = []
    max_exp = np.log2(max(1, (length - 1) // 8))
    for _ in range(count):
        weights = rng.standard_normal(9)
        weights -= weights.mean()
        mix = rng.standard_normal(channels)
        dilation = int(2 ** rng.uniform(0, max_exp))
        kernels.append((weights, mix, dilation))
    return kernels


def features(x, kernels, biases=None):
    n, _, length = x.shape
    out = np.empty((n, len(kernels)))
    fitted = []
    for k, (weights, mix, dilation) in enumerate(kernels):
        mixed = np.einsum("c,ncl->nl", mix, x)
        padded = np.pad(mixed, ((0, 0), (4 * dilation, 4 * dilation)))
        response = sum(w * padded[:, j * dilation:j * dilation + length] for j, w in enumerate(weights))
        bias = np.quantile(response[0], 0.5) if biases is None else biases[k]
        fitted.append(bias)
        out[:, k] = (response > bias).mean(axis=1)
    return out, fitted


def accuracy(train, test, y_train, y_test, seed, count):
    rng = np.random.default_rng(seed)
    kernels = random_kernels(rng, train.shape[1], train.shape[2], count)
    f_train, biases = features(train, kernels)
    f_test, _ = features(test, kernels, biases)
    model = RidgeClassifierCV(alphas=np.logspace(-3, 3, 13)).fit(f_train, y_train)
    return model.score(f_test, y_test)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--kernels", type=int, default=500)
    parser.add_argument("--n-train", type=int, default=200)
    parser.add_argument("--n-test", type=int, default=100)
    args = parser.parse_args()

    data = roman.generate("position", seed=args.seed, n_train=args.n_train, n_test=args.n_test)
    for scales in (1, 4):
        train, plan = roman.transform(data["X_train"], scales)
        test, _ = roman.transform(data["X_test"], scales)
        acc = accuracy(train, test, data["y_train"], data["y_test"], args.seed, args.kernels)
        print(f"S={scales}: {plan['total_pseudochannels']} x {plan['base_length']} input, test accuracy {acc:.3f}")


if __name__ == "__main__":
    main()
