import setuptools

setuptools.setup(
    name='FOOD',
    version='0.1',
    description='Face out-of-distribution detection for 60 GHz FMCW radar',
    packages=setuptools.find_packages(exclude=['tests']),
    python_requires='>=3.9',
    install_requires=[
        'numpy',
        'numba',
        'scipy',
        'scikit-learn',
        'tqdm',
    ],
    extras_require={'test': ['pytest','hypothesis']},
    entry_points={'console_scripts': ['food=food.cli:main']},
)
