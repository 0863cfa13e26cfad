"""Surface flattening and Riemannian-motion-policy planning on triangle meshes."""

__version__ = "0.1.0"
