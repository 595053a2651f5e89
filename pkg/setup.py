from setuptools import setup, find_packages

# Read the contents of README.md
with open('README.md', 'r', encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='mmwave_impairment_toolkit',
    version='0.1.0',
    packages=find_packages(),
    package_data={
        'tools.experiment': ['presets/*.yaml'],
    },
    include_package_data=True,
    install_requires=[
        'numpy>=1.22.0',
        'scipy>=1.8.0',
        'pandas>=1.5.0',
        'rich>=10.0.0',
        'ruamel.yaml>=0.17.0',
    ],
    entry_points={
        'console_scripts': [
            'mmwkit=tools.cli:main',
        ],
    },
    description='A toolkit for simulating mmWave transceiver impairments: phase noise, '
                'power-amplifier nonlinearity, antenna arrays and OFDM link error rates.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering',
        'Topic :: Communications',
    ],
    python_requires='>=3.8',
    license='MIT',
)
