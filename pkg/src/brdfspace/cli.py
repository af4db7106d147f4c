"""Command-line toolkit: ingest data, train, and work with the learned space."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import merl, metrics as metrics_mod, preprocess, synthetic
from .latent import (
    TraversalSpec,
    augment,
    decode_augmented,
    decode_denormalized,
    dump_code,
    parse_code,
    traverse as traverse_codes,
)
from .manifold import ManifoldModel, fit_manifold, sample_grid
from .model import Checkpoint, encode_single, load_checkpoint, save_checkpoint
from .preview import PreviewScene, contact_sheet, render_sphere, render_sphere_raw, tonemap
from .training import load_train_run, train as run_training


def _load_dataset(dataset_dir: Path) -> list[preprocess.NetworkInput]:
    index = dataset_dir / "dataset.json"
    if index.exists():
        names = json.loads(index.read_text())["inputs"]
        sidecars = [dataset_dir / n for n in names]
    else:
        sidecars = sorted(p for p in dataset_dir.glob("*.json") if p.name != "dataset.json")
    inputs = [preprocess.load_network_input(p) for p in sidecars]
    if not inputs:
        raise click.ClickException(f"no ingested inputs found in {dataset_dir}")
    return inputs


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise click.BadParameter(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _scene_options(fn):
    fn = click.option("--size", default=128, show_default=True, help="Preview size in pixels.")(fn)
    fn = click.option("--light", default="0.378,0.378,0.845", show_default=True,
                      help="Light direction x,y,z.")(fn)
    fn = click.option("--intensity", default="6,6,6", show_default=True,
                      help="Light RGB intensity.")(fn)
    fn = click.option("--gamma", default=2.2, show_default=True)(fn)
    fn = click.option("--exposure", default=1.0, show_default=True)(fn)
    return fn


def _make_scene(size, light, intensity, gamma, exposure) -> PreviewScene:
    return PreviewScene(size=size, light_dir=_parse_vec3(light),
                        light_rgb=_parse_vec3(intensity), gamma=gamma, exposure=exposure)


def _decoded_full_table(model, code, norm) -> np.ndarray:
    """Decode an 8- or 10-code to a full (3, 90, 90, 180) stored-units table
    with below-horizon bins marked invalid (-1)."""
    code = np.asarray(code, dtype=np.float64)
    if code.shape == (10,):
        reduced = decode_augmented(model, code, norm)
    else:
        reduced = decode_denormalized(model, code, norm)
    full = preprocess.expand_slices(np.moveaxis(reduced, 1, 3))
    full[:, ~merl.geometric_validity()] = -1.0
    return full


@click.group()
@click.version_option()
def main():
    """Toolkit for a disentangled latent parameter space over measured BRDFs."""


@main.command()
@click.argument("merl_dir", type=click.Path(path_type=Path))
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--synthesize", default=0, show_default=True,
              help="Generate this many demo materials into MERL_DIR first.")
@click.option("--seed", default=0, show_default=True)
def ingest(merl_dir: Path, out_dir: Path, synthesize: int, seed: int):
    """Convert MERL .binary files into normalized network inputs."""
    merl_dir.mkdir(parents=True, exist_ok=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    if synthesize:
        for b in synthetic.demo_materials(synthesize, seed=seed):
            merl.write_merl(b, merl_dir / f"{b.name}.binary")
            click.echo(f"synthesized {b.name}.binary")
    files = sorted(merl_dir.glob("*.binary"))
    if not files:
        raise click.ClickException(f"no .binary files in {merl_dir}")
    sidecars = []
    for f in files:
        brdf = merl.read_merl(f)
        ni = preprocess.to_network_input(brdf)
        sidecar = preprocess.save_network_input(ni, out_dir / brdf.name)
        sidecars.append(sidecar.name)
        click.echo(f"ingested {brdf.name} -> {sidecar.name}")
    (out_dir / "dataset.json").write_text(json.dumps({"inputs": sidecars}, indent=2))
    click.echo(f"wrote {out_dir / 'dataset.json'} ({len(sidecars)} materials)")


@main.command(name="train")
@click.argument("config", type=click.Path(exists=True, path_type=Path))
@click.option("--log-every", default=10, show_default=True)
def train_cmd(config: Path, log_every: int):
    """Train from a JSON/TOML config naming dataset, hyperparameters, outputs."""
    run = load_train_run(config)
    dataset = _load_dataset(run.dataset_dir)
    click.echo(f"training on {len(dataset)} materials for {run.train.epochs} epochs "
               f"(seed {run.train.seed})")
    ckpt, record = run_training(dataset, run.train, run.model, log_every=log_every)
    run.checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ckpt, run.checkpoint_path)
    record.to_csv(run.record_path)
    from .reports import save_loss_figure

    fig = save_loss_figure(record, run.record_path.with_suffix(".png"))
    click.echo(f"checkpoint: {run.checkpoint_path}")
    click.echo(f"record: {run.record_path} (figure {fig})")


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), help="Write latents JSON here.")
def encode(inputs, ckpt_path: Path, out: Path | None):
    """Encode MERL .binary files to latent statistics."""
    ckpt = load_checkpoint(ckpt_path)
    model = ckpt.build_model()
    result = {}
    for f in inputs:
        brdf = merl.read_merl(f)
        ni = preprocess.to_network_input(brdf, ckpt.norm)
        stats = encode_single(model, ni.values)
        result[brdf.name] = {"mu": stats.mu.tolist(), "log_var": stats.log_var.tolist()}
        click.echo(f"{brdf.name}: mu = {np.round(stats.mu, 3).tolist()}")
    if out:
        out.write_text(json.dumps(result, indent=2))
        click.echo(f"wrote {out}")


@main.command()
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--code", help="8 or 10 comma-separated values, or JSON.")
@click.option("--code-file", type=click.Path(exists=True, path_type=Path))
@click.option("--material", help="Decode this material's stored mean.")
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Output MERL .binary path.")
@click.option("--preview", type=click.Path(path_type=Path), help="Also render a preview PNG.")
@_scene_options
def decode(ckpt_path, code, code_file, material, out: Path, preview, size, light,
           intensity, gamma, exposure):
    """Decode a latent or augmented code to a MERL .binary file."""
    ckpt = load_checkpoint(ckpt_path)
    model = ckpt.build_model()
    if code_file:
        v = parse_code(Path(code_file).read_text())
    elif code:
        v = parse_code(code)
    elif material:
        stats = ckpt.latent_table.get(material)
        if stats is None:
            raise click.ClickException(f"unknown material {material!r}")
        v = np.asarray(stats.mu, dtype=np.float64)
    else:
        raise click.ClickException("provide --code, --code-file or --material")

    full = _decoded_full_table(model, v, ckpt.norm)
    out.parent.mkdir(parents=True, exist_ok=True)
    merl.write_merl(merl.MerlBRDF(name=out.stem, samples=full), out)
    click.echo(f"wrote {out}")
    if preview:
        img = render_sphere(full, _make_scene(size, light, intensity, gamma, exposure))
        Image.fromarray(img).save(preview)
        click.echo(f"preview: {preview}")


@main.command()
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--material", help="Base material (defaults to the zero code).")
@click.option("--code", help="Base 8-code instead of a material.")
@click.option("--dim", type=click.IntRange(1, 8), help="Single dimension to sweep.")
@click.option("--steps", default=7, show_default=True)
@click.option("--lo", default=-3.0, show_default=True)
@click.option("--hi", default=3.0, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Sheet PNG path.")
@click.option("--codes-csv", type=click.Path(path_type=Path), help="Also dump swept codes.")
@_scene_options
def traverse(ckpt_path, material, code, dim, steps, lo, hi, out: Path, codes_csv,
             size, light, intensity, gamma, exposure):
    """Render a latent-traversal contact sheet (one dim, or all 8 by default)."""
    ckpt = load_checkpoint(ckpt_path)
    model = ckpt.build_model()
    if code:
        base = parse_code(code)
        if base.shape != (8,):
            raise click.ClickException("traversal base must be a length-8 code")
    elif material:
        stats = ckpt.latent_table.get(material)
        if stats is None:
            raise click.ClickException(f"unknown material {material!r}")
        base = np.asarray(stats.mu, dtype=np.float64)
    else:
        base = np.zeros(8)

    dims = [dim] if dim else list(range(1, 9))
    all_codes = []
    for d in dims:
        all_codes.extend(traverse_codes(TraversalSpec(base=base, dim=d, lo=lo, hi=hi, steps=steps)))
    scene = _make_scene(size, light, intensity, gamma, exposure)
    sheet = contact_sheet(all_codes, model, scene, cols=steps, norm=ckpt.norm)
    out.parent.mkdir(parents=True, exist_ok=True)
    from .reports import save_sheet_figure

    save_sheet_figure(sheet, out, tile_size=size,
                      row_labels=[f"dim {d}" for d in dims] if len(dims) > 1 else None)
    click.echo(f"wrote {out} ({len(dims)} dims x {steps} steps)")
    if codes_csv:
        with open(codes_csv, "w") as f:
            f.write("dim,step," + ",".join(f"z{i+1}" for i in range(8)) + "\n")
            for i, c in enumerate(all_codes):
                d, s = dims[i // steps], i % steps
                f.write(f"{d},{s}," + ",".join(repr(x) for x in c) + "\n")
        click.echo(f"codes: {codes_csv}")


@main.command(name="augment")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--code", help="10-value augmented code; or use --material.")
@click.option("--material", help="Start from this material's neutral augmented code.")
@click.option("--green-diffuse", type=float, help="Override dimension 9.")
@click.option("--green-specular", type=float, help="Override dimension 10.")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--preview", type=click.Path(path_type=Path))
@click.option("--dump", type=click.Path(path_type=Path), help="Write the 10-code JSON here.")
@_scene_options
def augment_cmd(ckpt_path, code, material, green_diffuse, green_specular, out: Path,
                preview, dump, size, light, intensity, gamma, exposure):
    """Decode a 10-parameter augmented code (channel-swap color controls)."""
    ckpt = load_checkpoint(ckpt_path)
    model = ckpt.build_model()
    if code:
        v = parse_code(code)
        if v.shape != (10,):
            raise click.ClickException("augmented code must have length 10")
    elif material:
        stats = ckpt.latent_table.get(material)
        if stats is None:
            raise click.ClickException(f"unknown material {material!r}")
        v = augment(np.asarray(stats.mu, dtype=np.float64))
    else:
        raise click.ClickException("provide --code or --material")
    if green_diffuse is not None:
        v[8] = green_diffuse
    if green_specular is not None:
        v[9] = green_specular

    full = _decoded_full_table(model, v, ckpt.norm)
    out.parent.mkdir(parents=True, exist_ok=True)
    merl.write_merl(merl.MerlBRDF(name=out.stem, samples=full), out)
    click.echo(f"wrote {out}")
    if preview:
        img = render_sphere(full, _make_scene(size, light, intensity, gamma, exposure))
        Image.fromarray(img).save(preview)
        click.echo(f"preview: {preview}")
    if dump:
        Path(dump).write_text(dump_code(v))
        click.echo(f"code: {dump}")


@main.command()
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out-dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True)
@click.option("--neighbors", default=15, show_default=True)
@click.option("--min-dist", default=0.1, show_default=True)
@click.option("--epochs", default=500, show_default=True)
@click.option("--grid/--no-grid", default=True, show_default=True,
              help="Also sample a 7x7 grid and render its contact sheet.")
@_scene_options
def embed(ckpt_path, out_dir: Path, seed, neighbors, min_dist, epochs, grid,
          size, light, intensity, gamma, exposure):
    """Fit the 2D manifold over stored latents; write model, CSV and figures."""
    ckpt = load_checkpoint(ckpt_path)
    names = list(ckpt.latent_table.keys())
    mus = np.stack([ckpt.latent_table[n].mu for n in names])
    m = fit_manifold(mus, names, seed=seed, n_neighbors=neighbors,
                     min_dist=min_dist, n_epochs=epochs)
    out_dir.mkdir(parents=True, exist_ok=True)
    m.save(out_dir / "manifold.npz")
    with open(out_dir / "embedding.csv", "w") as f:
        f.write("material,x,y\n")
        for name, (x, y) in zip(m.names, m.embedding):
            f.write(f"{name},{repr(float(x))},{repr(float(y))}\n")

    grid_pts = None
    if grid:
        codes = sample_grid(m, 7, 7)
        x0, y0, x1, y1 = m.bounding_box()
        xs = np.linspace(x0, x1, 7)
        ys = np.linspace(y0, y1, 7)
        grid_pts = [[x, y] for y in ys for x in xs]
        model = ckpt.build_model()
        scene = _make_scene(size, light, intensity, gamma, exposure)
        sheet = contact_sheet(codes, model, scene, cols=7, norm=ckpt.norm)
        Image.fromarray(sheet).save(out_dir / "manifold_grid.png")
        with open(out_dir / "grid_codes.csv", "w") as f:
            f.write("row,col," + ",".join(f"z{i+1}" for i in range(8)) + "\n")
            for i, c in enumerate(codes):
                f.write(f"{i // 7},{i % 7}," + ",".join(repr(float(x)) for x in c) + "\n")

    from .reports import save_embedding_figure

    save_embedding_figure(m, out_dir / "embedding.png", grid_points=grid_pts)
    click.echo(f"manifold over {len(names)} materials -> {out_dir}")


@main.command(name="metrics")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--merl-dir", required=True, type=click.Path(exists=True, path_type=Path),
              help="Directory of reference .binary files.")
@click.option("--out-dir", required=True, type=click.Path(path_type=Path))
def metrics_cmd(ckpt_path, merl_dir: Path, out_dir: Path):
    """Reconstruction RelAE per material, as CSV plus a bar figure."""
    ckpt = load_checkpoint(ckpt_path)
    model = ckpt.build_model()
    files = sorted(Path(merl_dir).glob("*.binary"))
    if not files:
        raise click.ClickException(f"no .binary files in {merl_dir}")
    reports = []
    for f in files:
        brdf = merl.read_merl(f)
        ni = preprocess.to_network_input(brdf, ckpt.norm)
        stats = encode_single(model, ni.values)
        reduced = decode_denormalized(model, stats.mu, ckpt.norm)
        full = preprocess.expand_slices(np.moveaxis(reduced, 1, 3))
        mask = merl.geometric_validity() & np.all(brdf.samples >= 0, axis=0)
        rep = metrics_mod.report(brdf.name, full, brdf.samples, mask)
        reports.append(rep)
        click.echo(f"{brdf.name:24s} RelAE ratio={rep.rel_ae_ratio:.4f} "
                   f"pointwise={rep.rel_ae_pointwise:.4f}")
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_mod.write_report_csv(reports, out_dir / "metrics.csv")
    from .reports import save_metrics_figure

    save_metrics_figure(reports, out_dir / "metrics.png")
    click.echo(f"wrote {out_dir / 'metrics.csv'} and metrics.png")


@main.command()
@click.argument("input_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--raw", type=click.Path(path_type=Path),
              help="Also dump the linear image as little-endian float32.")
@_scene_options
def render(input_file: Path, out: Path, raw, size, light, intensity, gamma, exposure):
    """Render a sphere preview of a MERL .binary file."""
    brdf = merl.read_merl(input_file)
    scene = _make_scene(size, light, intensity, gamma, exposure)
    linear = render_sphere_raw(brdf, scene)
    img = tonemap(linear, scene.gamma, scene.exposure)
    out.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img).save(out)
    click.echo(f"wrote {out}")
    if raw:
        Path(raw).write_bytes(linear.astype("<f4").tobytes())
        click.echo(f"raw: {raw}")


@main.command()
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--manifold", "manifold_path", type=click.Path(exists=True, path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
def serve(ckpt_path, manifold_path, host, port):
    """Serve the interactive editing API."""
    import uvicorn

    from .service import create_app

    app = create_app(ckpt_path, manifold_path)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
